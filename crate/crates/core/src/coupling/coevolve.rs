//! Monolithic driver: fluid, labels and spinor advanced together by Strang
//! splitting, plus the spinor reconstruction used after a Picard solve.

use super::fields::{force_source, potential_field, shortwave_energy_on_eulerian, CouplingParams};
use super::mollifier::{build_mollifier, MollifierKernel};
use crate::dirac::{observable, DiracSolver, FreePotential, Observable, SpinorField, ThirringPotential};
use crate::dirac::solver::thirring_apply;
use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, VectorField};
use crate::hydro::{FluidField, FvScheme};
use crate::lagrangian::{advance_label, initial_label, InverseMap, LabelField};
use crate::wave::WavePropagator;

/// Courant bound for the semi-Lagrangian label update.
pub const LABEL_COURANT: f64 = 1.0;

#[derive(Clone, Debug)]
pub struct CoupledState {
    pub fluid: FluidField,
    /// Lives on the Lagrangian grid `labels.lagrangian_grid()`.
    pub spinor: SpinorField,
    pub labels: LabelField,
    pub time: f64,
}

/// The Lagrangian torus that initial labels built from `fluid` map onto.
pub fn lagrangian_grid_for(fluid: &FluidField) -> Result<Grid> {
    Ok(initial_label(&fluid.rho_re())?.lagrangian_grid())
}

impl CoupledState {
    /// Builds the initial labels from `fluid` and checks that `spinor` sits on
    /// the matching Lagrangian grid.
    pub fn new(fluid: FluidField, mut spinor: SpinorField) -> Result<Self> {
        let labels = initial_label(&fluid.rho_re())?;
        let lag = labels.lagrangian_grid();
        lag.same_shape(&spinor.grid)?;
        let (a, b) = (lag.lengths(), spinor.grid.lengths());
        if (0..3).any(|i| (a[i] - b[i]).abs() > 1e-12 * a[i]) {
            return Err(Error::Invalid(format!(
                "spinor box {b:?} does not match the Lagrangian box {a:?}"
            )));
        }
        spinor.grid = lag;
        Ok(Self {
            fluid,
            spinor,
            labels,
            time: 0.0,
        })
    }

    pub fn lagrangian_grid(&self) -> Grid {
        self.labels.lagrangian_grid()
    }
}

/// How the Thirring matrix is assembled during a spinor solve.
#[derive(Clone, Copy)]
pub enum Interaction<'a> {
    /// From the spinor being advanced.
    Evolved,
    /// From wave-equation propagations of `|u|^2` and `u^dag b u`.
    Wave {
        charge: &'a WavePropagator,
        chiral: &'a WavePropagator,
    },
}

#[derive(Clone, Debug)]
pub struct Coupler {
    pub params: CouplingParams,
    pub solver: DiracSolver,
    pub scheme: FvScheme,
    pub kernel: MollifierKernel,
    pub label_courant: f64,
}

fn lerp(a: &ScalarField, b: &ScalarField, theta: f64, node: usize) -> f64 {
    (1.0 - theta) * a.data[node] + theta * b.data[node]
}

impl Coupler {
    pub fn new(params: CouplingParams, eulerian: &Grid) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            solver: DiracSolver::default(),
            scheme: FvScheme::default(),
            kernel: build_mollifier(params.delta, eulerian)?,
            label_courant: LABEL_COURANT,
        })
    }

    fn label_limit(&self, fluid: &FluidField) -> f64 {
        let vmax = fluid
            .u_re()
            .data
            .iter()
            .fold(0.0f64, |m, v| m.max(v[0].abs()).max(v[1].abs()).max(v[2].abs()));
        if vmax > 0.0 {
            self.label_courant * fluid.grid().min_active_spacing() / vmax
        } else {
            f64::INFINITY
        }
    }

    /// Largest step satisfying the fluid, Dirac and label limits.
    pub fn max_dt(&self, cs: &CoupledState) -> f64 {
        self.scheme
            .max_dt(&cs.fluid)
            .min(self.solver.max_dt(&cs.spinor.grid))
            .min(self.label_limit(&cs.fluid))
    }

    /// `alpha grad(zeta * w(y(x)))`, or `None` when the force is switched off.
    pub fn force_from_energy(&self, w: &ScalarField, labels: &LabelField) -> Result<Option<VectorField>> {
        if self.params.alpha == 0.0 {
            return Ok(None);
        }
        let w_eul = shortwave_energy_on_eulerian(w, labels);
        force_source(&w_eul, &self.kernel, self.params.alpha).map(Some)
    }

    pub fn force(&self, spinor: &SpinorField, labels: &LabelField) -> Result<Option<VectorField>> {
        if self.params.alpha == 0.0 {
            return Ok(None);
        }
        let w = observable(spinor, &self.solver.alphas, Observable::Charge);
        self.force_from_energy(&w, labels)
    }

    /// `kappa / rho_re(x(y))`, or `None` when `kappa = 0`.
    pub fn potential(&self, fluid: &FluidField, labels: &LabelField) -> Result<Option<ScalarField>> {
        if self.params.kappa == 0.0 {
            return Ok(None);
        }
        let lag = labels.lagrangian_grid();
        potential_field(&fluid.rho_re(), &InverseMap::new(labels), &lag, self.params.kappa).map(Some)
    }

    /// One Strang step: fluid half step under the current force; labels and
    /// spinor over the full step with `V` frozen at the midpoint; force
    /// rebuilt from the new spinor and labels; second fluid half step.
    /// On error the caller keeps `cs` as the last good snapshot.
    pub fn coevolve_step(&self, cs: &CoupledState, dt: f64) -> Result<CoupledState> {
        let t = cs.time;
        let limit = self.max_dt(cs);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl {
                dt,
                limit,
                context: "coupled step",
            });
        }
        let f0 = self.force(&cs.spinor, &cs.labels).map_err(Error::at_stage("force", t))?;
        let half = self
            .scheme
            .step(&cs.fluid, f0.as_ref(), 0.5 * dt)
            .map_err(Error::at_stage("fluid half step", t))?;
        let u_mid = half.u_re();
        let labels_mid = advance_label(&cs.labels, &u_mid, 0.5 * dt, self.label_courant)
            .map_err(Error::at_stage("label transport", t))?;
        let v = self
            .potential(&half, &labels_mid)
            .map_err(Error::at_stage("potential", t + 0.5 * dt))?;
        let spinor = if self.params.lambda == 0.0 && v.is_none() {
            self.solver.step(&cs.spinor, &FreePotential, t, dt)
        } else {
            let pot = ThirringPotential {
                alphas: &self.solver.alphas,
                lambda: self.params.lambda,
                v: v.as_ref(),
            };
            self.solver.step(&cs.spinor, &pot, t, dt)
        }
        .map_err(Error::at_stage("Dirac step", t))?;
        // One interpolation per step from the old labels; the half-step labels only feed `V`.
        let labels = advance_label(&cs.labels, &u_mid, dt, self.label_courant)
            .map_err(Error::at_stage("label transport", t))?;
        let f1 = self.force(&spinor, &labels).map_err(Error::at_stage("force", t + dt))?;
        let fluid = self
            .scheme
            .step(&half, f1.as_ref(), 0.5 * dt)
            .map_err(Error::at_stage("fluid half step", t + 0.5 * dt))?;
        Ok(CoupledState {
            fluid,
            spinor,
            labels,
            time: t + dt,
        })
    }

    /// Equal steps no larger than `max_dt` of the initial state until `duration`.
    pub fn coevolve(&self, cs: &CoupledState, duration: f64) -> Result<Vec<CoupledState>> {
        let steps = (duration / (0.9 * self.max_dt(cs))).ceil().max(1.0) as usize;
        let dt = duration / steps as f64;
        let mut out = vec![cs.clone()];
        for _ in 0..steps {
            let next = self.coevolve_step(out.last().expect("nonempty"), dt)?;
            out.push(next);
        }
        Ok(out)
    }

    /// Spinor trajectory at `times` under `B = lambda U + V I`, with `V`
    /// linear in time between the given samples (`None` meaning zero) and `U`
    /// assembled according to `interaction`. Each interval is split into
    /// equal CFL-limited RK4 steps.
    pub fn dirac_full_solve(
        &self,
        spinor0: &SpinorField,
        times: &[f64],
        potentials: &[Option<ScalarField>],
        interaction: Interaction<'_>,
    ) -> Result<Vec<SpinorField>> {
        if times.len() != potentials.len() {
            return Err(Error::Invalid(format!(
                "{} times but {} potential samples",
                times.len(),
                potentials.len()
            )));
        }
        if times.is_empty() {
            return Ok(Vec::new());
        }
        let grid = &spinor0.grid;
        let zero = ScalarField::filled(grid, 0.0);
        let lambda = self.params.lambda;
        let alphas = &self.solver.alphas;
        let mut out = vec![spinor0.clone()];
        let mut cur = spinor0.clone();
        for k in 0..times.len() - 1 {
            let (ta, tb) = (times[k], times[k + 1]);
            let va = potentials[k].as_ref().unwrap_or(&zero);
            let vb = potentials[k + 1].as_ref().unwrap_or(&zero);
            let span = tb - ta;
            let n = (span / self.solver.max_dt(grid)).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for m in 0..n {
                let t = ta + m as f64 * h;
                let stage_times = [t, t + 0.5 * h, t + h];
                let theta = |s: f64| if span > 0.0 { (s - ta) / span } else { 0.0 };
                cur = match interaction {
                    Interaction::Evolved => {
                        let pot = |s: f64, node: usize, u: &crate::dirac::Spinor| {
                            let v = lerp(va, vb, theta(s), node);
                            thirring_apply(alphas, lambda, v, u.norm_sqr(), u.bilinear(&alphas.b).re, u)
                        };
                        self.solver.step(&cur, &pot, t, h)?
                    }
                    Interaction::Wave { charge, chiral } => {
                        let mut rho = Vec::with_capacity(3);
                        let mut chi = Vec::with_capacity(3);
                        for s in stage_times {
                            rho.push(charge.at(s)?);
                            chi.push(chiral.at(s)?);
                        }
                        let pick = |s: f64| {
                            (0..3)
                                .min_by(|&a, &b| {
                                    (stage_times[a] - s).abs().total_cmp(&(stage_times[b] - s).abs())
                                })
                                .expect("three stages")
                        };
                        let pot = |s: f64, node: usize, u: &crate::dirac::Spinor| {
                            let i = pick(s);
                            let v = lerp(va, vb, theta(s), node);
                            thirring_apply(alphas, lambda, v, rho[i].data[node], chi[i].data[node], u)
                        };
                        self.solver.step(&cur, &pot, t, h)?
                    }
                };
            }
            out.push(cur.clone());
        }
        Ok(out)
    }
}
