//! Fixed-point iteration on the fluid trajectory. Each map application
//! evolves the fluid over `[0, T]` with the force of the previous iterate,
//! transports labels with the new `u_re`, and rebuilds the force from the
//! wave-equation propagation of `|u|^2` composed with those labels.

use super::coevolve::{CoupledState, Coupler, Interaction};
use crate::dirac::{Observable, Spinor, SpinorField};
use crate::error::{Error, Result};
use crate::grid::VectorField;
use crate::hydro::FluidField;
use crate::lagrangian::{advance_label, LabelField};
use crate::wave::WavePropagator;

pub const DEFAULT_PICARD_TOL: f64 = 1e-8;
pub const DEFAULT_PICARD_MAX_ITER: usize = 30;

#[derive(Clone, Copy, Debug)]
pub struct PicardOptions {
    pub t_final: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Solve for the spinor along the converged trajectory.
    pub reconstruct_spinor: bool,
}

impl PicardOptions {
    pub fn new(t_final: f64) -> Self {
        Self {
            t_final,
            tol: DEFAULT_PICARD_TOL,
            max_iter: DEFAULT_PICARD_MAX_ITER,
            reconstruct_spinor: true,
        }
    }
}

/// Three consecutive non-decreasing distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceReport {
    pub iteration: usize,
    pub distances: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PicardOutcome {
    pub times: Vec<f64>,
    pub fluid: Vec<FluidField>,
    pub labels: Vec<LabelField>,
    pub spinors: Option<Vec<SpinorField>>,
    /// `distances[n] = sup_t ||V^(n+1) - V^(n)||_2`, with `V^(0)` the frozen initial state.
    pub distances: Vec<f64>,
    pub converged: bool,
    pub divergence: Option<DivergenceReport>,
}

impl PicardOutcome {
    /// Index `n` of the first iterate with `d(V^(n+1), V^(n)) < tol`.
    pub fn iterations_to_fixed_point(&self, tol: f64) -> Option<usize> {
        self.distances.iter().position(|d| *d < tol)
    }

    /// Geometric mean of successive distance ratios, ignoring distances at
    /// roundoff level.
    pub fn contraction_factor(&self) -> Option<f64> {
        let floor = 1e-13 * self.distances.first().copied().unwrap_or(0.0);
        let used: Vec<f64> = self.distances.iter().copied().take_while(|d| *d > floor).collect();
        if used.len() < 2 {
            return None;
        }
        let logs: f64 = used.windows(2).map(|w| (w[1] / w[0]).ln()).sum();
        Some((logs / (used.len() - 1) as f64).exp())
    }

    /// Coupled states along the trajectory; the spinor is zero when it was
    /// not reconstructed.
    pub fn states(&self) -> Vec<CoupledState> {
        (0..self.times.len())
            .map(|k| CoupledState {
                fluid: self.fluid[k].clone(),
                spinor: match &self.spinors {
                    Some(s) => s[k].clone(),
                    None => SpinorField::filled(&self.labels[k].lagrangian_grid(), Spinor::zero()),
                },
                labels: self.labels[k].clone(),
                time: self.times[k],
            })
            .collect()
    }
}

fn sup_distance(a: &[FluidField], b: &[FluidField]) -> Result<f64> {
    a.iter()
        .zip(b)
        .try_fold(0.0f64, |m, (x, y)| Ok(m.max(x.l2_distance(y)?)))
}

fn midpoint(a: &Option<VectorField>, b: &Option<VectorField>) -> Option<VectorField> {
    match (a, b) {
        (Some(a), Some(b)) => Some(VectorField {
            grid: a.grid.clone(),
            data: a
                .data
                .iter()
                .zip(&b.data)
                .map(|(x, y)| std::array::from_fn(|i| 0.5 * (x[i] + y[i])))
                .collect(),
        }),
        _ => None,
    }
}

impl Coupler {
    fn transport_labels(&self, init: &LabelField, fluid: &[FluidField], dt: f64) -> Result<Vec<LabelField>> {
        let mut out = vec![init.clone()];
        for k in 0..fluid.len() - 1 {
            let (ua, ub) = (fluid[k].u_re(), fluid[k + 1].u_re());
            let mid = VectorField {
                grid: ua.grid.clone(),
                data: ua
                    .data
                    .iter()
                    .zip(&ub.data)
                    .map(|(x, y)| std::array::from_fn(|i| 0.5 * (x[i] + y[i])))
                    .collect(),
            };
            let next = advance_label(&out[k], &mid, dt, self.label_courant)?;
            out.push(next);
        }
        Ok(out)
    }

    fn forces_along(
        &self,
        labels: &[LabelField],
        wave: &WavePropagator,
        times: &[f64],
    ) -> Result<Vec<Option<VectorField>>> {
        if self.params.alpha == 0.0 {
            return Ok(vec![None; times.len()]);
        }
        times
            .iter()
            .zip(labels)
            .map(|(t, lf)| self.force_from_energy(&wave.at(*t)?, lf))
            .collect()
    }

    fn evolve_fluid(
        &self,
        init: &FluidField,
        forces: &[Option<VectorField>],
        dt: f64,
    ) -> Result<Vec<FluidField>> {
        let mut out = vec![init.clone()];
        for k in 0..forces.len() - 1 {
            let src = midpoint(&forces[k], &forces[k + 1]);
            let next = self
                .scheme
                .step(&out[k], src.as_ref(), dt)
                .map_err(Error::at_stage("Picard fluid step", k as f64 * dt))?;
            out.push(next);
        }
        Ok(out)
    }

    /// Picard iteration from `init` over `[0, opts.t_final]`.
    pub fn picard_solve(&self, init: &CoupledState, opts: &PicardOptions) -> Result<PicardOutcome> {
        if !(opts.t_final > 0.0) {
            return Err(Error::Domain {
                what: "Picard horizon",
                value: opts.t_final,
                domain: "T > 0".into(),
            });
        }
        let limit = self.scheme.max_dt(&init.fluid).min(
            // Label speeds never exceed the light speed 1/epsilon.
            self.label_courant * init.fluid.grid().min_active_spacing() * init.fluid.model.eps,
        );
        let steps = (opts.t_final / limit).ceil().max(1.0) as usize;
        let dt = opts.t_final / steps as f64;
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();

        let q = self.solver.initial_observable(&init.spinor, Observable::Charge);
        let wave = WavePropagator::new(&q.w, &q.wt)?;

        let mut fluid = vec![init.fluid.clone(); times.len()];
        let mut labels = self.transport_labels(&init.labels, &fluid, dt)?;
        let mut distances = Vec::new();
        let mut converged = false;
        let mut divergence = None;
        for iteration in 1..=opts.max_iter {
            let forces = self.forces_along(&labels, &wave, &times)?;
            let next = self.evolve_fluid(&init.fluid, &forces, dt)?;
            let d = sup_distance(&next, &fluid)?;
            distances.push(d);
            fluid = next;
            labels = self.transport_labels(&init.labels, &fluid, dt)?;
            if d < opts.tol {
                converged = true;
                break;
            }
            let n = distances.len();
            if n >= 3 && distances[n - 1] >= distances[n - 2] && distances[n - 2] >= distances[n - 3] {
                divergence = Some(DivergenceReport {
                    iteration,
                    distances: distances.clone(),
                });
                break;
            }
        }

        let spinors = if converged && opts.reconstruct_spinor {
            let potentials = fluid
                .iter()
                .zip(&labels)
                .map(|(f, lf)| self.potential(f, lf))
                .collect::<Result<Vec<_>>>()?;
            let x = self.solver.initial_observable(&init.spinor, Observable::Pseudocharge);
            let chiral = WavePropagator::new(&x.w, &x.wt)?;
            Some(self.dirac_full_solve(
                &init.spinor,
                &times,
                &potentials,
                Interaction::Wave {
                    charge: &wave,
                    chiral: &chiral,
                },
            )?)
        } else {
            None
        };

        Ok(PicardOutcome {
            times,
            fluid,
            labels,
            spinors,
            distances,
            converged,
            divergence,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::coevolve::lagrangian_grid_for;
    use crate::coupling::CouplingParams;
    use crate::grid::{Field, Grid};
    use crate::hydro::{Eos, Primitive, RelEuler};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn state(n: usize) -> CoupledState {
        let g = Grid::new([1, 1, n], [1.0, 1.0, 1.0]).unwrap();
        let model = RelEuler::new(0.5, Eos::linear(0.25)).unwrap();
        let f = FluidField::from_primitives(&g, model, |x| Primitive {
            rho: 1.0 + 0.2 * (2.0 * PI * x[2]).sin(),
            u: [0.0; 3],
        })
        .unwrap();
        let lag = lagrangian_grid_for(&f).unwrap();
        let lz = lag.lengths()[2];
        let u = Field::from_fn(&lag, |y| {
            let s = (y[2] - 0.5 * lz) / (0.15 * lz);
            let a = (-s * s).exp();
            Spinor([
                Complex64::new(a, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.5 * a),
                Complex64::new(0.0, 0.0),
            ])
        });
        CoupledState::new(f, u).unwrap()
    }

    #[test]
    fn zero_force_is_a_fixed_point_after_one_iterate() {
        let cs = state(32);
        let p = CouplingParams::new(1.0, 1.0, 0.0, 4.0 / 32.0, 0.5).unwrap();
        let c = Coupler::new(p, cs.fluid.grid()).unwrap();
        let out = c.picard_solve(&cs, &PicardOptions::new(0.05)).unwrap();
        assert!(out.converged);
        assert_eq!(out.distances.len(), 2);
        assert_eq!(out.distances[1], 0.0);
        assert_eq!(out.iterations_to_fixed_point(1e-8), Some(1));
        assert!(out.spinors.is_some());
    }

    #[test]
    fn small_force_contracts() {
        let cs = state(32);
        let mut factors = Vec::new();
        for alpha in [0.4, 0.2, 0.1] {
            let p = CouplingParams::new(0.0, 0.0, alpha, 4.0 / 32.0, 0.5).unwrap();
            let c = Coupler::new(p, cs.fluid.grid()).unwrap();
            let mut opts = PicardOptions::new(0.1);
            opts.reconstruct_spinor = false;
            let out = c.picard_solve(&cs, &opts).unwrap();
            assert!(out.converged, "{:?}", out.distances);
            assert!(out.divergence.is_none());
            factors.push(out.contraction_factor().unwrap());
        }
        assert!(factors[0] < 1.0);
        assert!(factors[1] < factors[0] && factors[2] < factors[1], "{factors:?}");
    }

    #[test]
    fn rejects_nonpositive_horizon() {
        let cs = state(16);
        let c = Coupler::new(CouplingParams::decoupled(0.5, 0.25), cs.fluid.grid()).unwrap();
        assert!(c.picard_solve(&cs, &PicardOptions::new(0.0)).is_err());
    }
}
