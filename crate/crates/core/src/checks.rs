//! Oracle checks shared by the audit report, the convergence study and the
//! acceptance suite.

use rand::Rng;

use crate::dirac::{observable, AlphaSet, Observable, Spinor, SpinorField};
use crate::error::Result;
use crate::grid::Grid;
use crate::hydro::{Eos, Primitive, PressureLossForm, RelEuler};
use crate::lagrangian::{advance_flow, FlowState, LinearVelocity, Tracer};
use crate::wave::WavePropagator;
use num_complex::Complex64;

/// Random model and physical state with `eps |u| <= beta_max`.
pub fn random_state<R: Rng>(rng: &mut R, eps: f64, beta_max: f64) -> (RelEuler, Primitive) {
    let sigma2 = rng.random_range(0.01..0.9) / (eps * eps);
    let model = RelEuler::new(eps, Eos::linear(sigma2)).expect("subluminal sound speed");
    let rho = 10f64.powf(rng.random_range(-1.0..1.0));
    let dir: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    let speed = rng.random_range(0.0..beta_max) / eps;
    (model, Primitive {
        rho,
        u: dir.map(|v| v / n * speed),
    })
}

/// Worst-case residuals of the auxiliary-variable form of the fluxes.
#[derive(Clone, Copy, Debug, Default)]
pub struct FluxEquivalence {
    /// `max |G u⊗u + pI - (rho_re u_re⊗u_re + P~ + pI)| / max(1, |G u⊗u + pI|)`.
    pub momentum_flux: f64,
    /// `max |D - rho_re| / D`.
    pub density: f64,
    /// `max |S - rho_re u_re| / max(1, |S|)`.
    pub momentum: f64,
}

impl FluxEquivalence {
    pub fn worst(&self) -> f64 {
        self.momentum_flux.max(self.density).max(self.momentum)
    }
}

pub fn flux_equivalence<R: Rng>(
    rng: &mut R,
    eps_values: &[f64],
    samples: usize,
    form: PressureLossForm,
) -> Result<FluxEquivalence> {
    let mut out = FluxEquivalence::default();
    for i in 0..samples {
        let eps = eps_values[i % eps_values.len()];
        let (model, prim) = random_state(rng, eps, 0.95);
        let m = model.momentum_flux(&prim)?;
        let rel = model.rel_variables_with(&prim, form)?;
        let cons = model.prim_to_cons(&prim)?;
        let (p, _) = model.eos.pressure(prim.rho);
        let scale = m.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
        for j in 0..3 {
            for k in 0..3 {
                let aux = rel.rho_re * rel.u_re[j] * rel.u_re[k]
                    + rel.p_tilde[j][k]
                    + if j == k { p } else { 0.0 };
                out.momentum_flux = out.momentum_flux.max((m[j][k] - aux).abs() / scale);
            }
        }
        out.density = out.density.max((cons.d - rel.rho_re).abs() / cons.d);
        let s_scale = cons.s.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for j in 0..3 {
            out.momentum = out
                .momentum
                .max((cons.s[j] - rel.rho_re * rel.u_re[j]).abs() / s_scale);
        }
    }
    Ok(out)
}

/// Relative error `|(rho, u)' - (rho, u)| / |(rho, u)|` of the recovery
/// roundtrip; returns the worst error and the number of failed recoveries.
pub fn recovery_roundtrip<R: Rng>(rng: &mut R, eps_values: &[f64], samples: usize) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for i in 0..samples {
        let eps = eps_values[i % eps_values.len()];
        let (model, prim) = random_state(rng, eps, 0.95);
        let Ok(cons) = model.prim_to_cons(&prim) else {
            failures += 1;
            continue;
        };
        match model.cons_to_prim(&cons) {
            Ok(back) => {
                let num = (back.rho - prim.rho).powi(2)
                    + (0..3).map(|a| (back.u[a] - prim.u[a]).powi(2)).sum::<f64>();
                let den = prim.rho.powi(2) + (0..3).map(|a| prim.u[a].powi(2)).sum::<f64>();
                worst = worst.max((num / den).sqrt());
            }
            Err(_) => failures += 1,
        }
    }
    (worst, failures)
}

/// Non-relativistic deviation `|rho_re - rho| + |u_re - u| + |P~|` summed over
/// states drawn once (with `eps`-independent `rho`, `u`, `sigma^2`) and
/// evaluated at each `eps`.
pub fn nonrelativistic_deviation<R: Rng>(rng: &mut R, eps_values: &[f64], samples: usize) -> Result<Vec<f64>> {
    let states: Vec<(f64, Primitive)> = (0..samples)
        .map(|_| {
            let sigma2 = rng.random_range(0.1..1.0);
            let rho = rng.random_range(0.5..2.0);
            let u: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            (sigma2, Primitive { rho, u })
        })
        .collect();
    eps_values
        .iter()
        .map(|&eps| {
            let mut total = 0.0;
            for (sigma2, prim) in &states {
                let model = RelEuler::new(eps, Eos::linear(*sigma2))?;
                let rel = model.rel_variables(prim)?;
                let du = (0..3).map(|a| (rel.u_re[a] - prim.u[a]).powi(2)).sum::<f64>().sqrt();
                let pt = rel.p_tilde.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
                total += (rel.rho_re - prim.rho).abs() + du + pt;
            }
            Ok(total)
        })
        .collect()
}

/// Worst residual of the hypotheses the interaction matrix must satisfy
/// (Hermitian, commuting with each `a_i`) over random spinors.
pub fn interaction_hypotheses<R: Rng>(rng: &mut R, alphas: &AlphaSet, samples: usize) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let s = Spinor(std::array::from_fn(|_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }));
        let lambda = rng.random_range(-2.0..2.0);
        let v = rng.random_range(-2.0..2.0);
        let b = alphas.interaction_matrix(&s, lambda, v);
        let scale = b.max_abs().max(1.0);
        worst = worst.max(b.hermiticity_defect() / scale);
        for a in &alphas.a {
            worst = worst.max(b.commutator(a).max_abs() / scale);
        }
    }
    worst
}

/// `||w(t) - wave(t)||_2 / ||wave(t)||_2` for `w = |u|^2` or `u^dag b u`.
pub fn wave_oracle_residual(
    spinor: &SpinorField,
    oracle: &WavePropagator,
    t: f64,
    alphas: &AlphaSet,
    which: Observable,
) -> Result<f64> {
    let w = observable(spinor, alphas, which);
    let exact = oracle.at(t)?;
    Ok(w.l2_distance(&exact)? / exact.l2_norm().max(f64::MIN_POSITIVE))
}

/// Absolute error of `J_Phi(T)` against `exp(tr(A) T)` for the linear flow
/// `u = A x`, integrated with `steps` RK4 steps.
pub fn linear_flow_jacobian_error(steps: usize, t_final: f64) -> f64 {
    let a = [[0.3, 0.1, 0.0], [0.0, -0.1, 0.2], [0.05, 0.0, 0.4]];
    let src = LinearVelocity(a);
    let dt = t_final / steps as f64;
    let mut fs = FlowState {
        tracers: vec![Tracer {
            position: [0.2, -0.1, 0.3],
            j_phi: 1.0,
            j_y: 1.0,
        }],
    };
    for n in 0..steps {
        fs = advance_flow(&fs, &src, n as f64 * dt, dt);
    }
    (fs.tracers[0].j_phi - (0.6 * t_final).exp()).abs()
}

/// Observed order `log2(e_coarse / e_fine)` for successive halvings.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Grid with every active axis refined by `factor`.
pub fn refine(grid: &Grid, factor: usize) -> Result<Grid> {
    let d = grid.dims();
    Grid::new(
        std::array::from_fn(|a| if d[a] > 1 { d[a] * factor } else { 1 }),
        grid.lengths(),
    )
}
