//! Time-domain evolution of `u_t - sum_i a_i u_{y_i} = -i B(t, y) u` on a
//! periodic Lagrangian grid: fourth-order centered differences in space,
//! classical RK4 in time.

use num_complex::Complex64;
use rayon::prelude::*;

use super::algebra::{AlphaSet, ComplexMatrix4, Spinor};
use crate::error::{Error, Result};
use crate::grid::{d1_at, derivative, Field, Grid, ScalarField};

pub type SpinorField = Field<Spinor>;
pub type PotentialField = Field<ComplexMatrix4>;

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// Hard ceiling on the configurable Courant number.
pub const MAX_DIRAC_CFL: f64 = 0.5;
pub const DEFAULT_CFL: f64 = 0.4;

/// Supplies `B(t, y) u` at a node. Implementations must keep `B` Hermitian
/// and commuting with every `a_i` for charge conservation to hold.
pub trait Potential: Sync {
    fn apply(&self, t: f64, node: usize, u: &Spinor) -> Spinor;
}

impl Potential for PotentialField {
    fn apply(&self, _t: f64, node: usize, u: &Spinor) -> Spinor {
        self.data[node].apply(u)
    }
}

impl<F> Potential for F
where
    F: Fn(f64, usize, &Spinor) -> Spinor + Sync,
{
    fn apply(&self, t: f64, node: usize, u: &Spinor) -> Spinor {
        self(t, node, u)
    }
}

/// No interaction at all.
pub struct FreePotential;

impl Potential for FreePotential {
    fn apply(&self, _t: f64, _node: usize, _u: &Spinor) -> Spinor {
        Spinor::zero()
    }
}

/// Massless Thirring interaction `lambda U(u) + V(y) I`, with `U` evaluated
/// from the spinor being advanced and a time-frozen scalar potential `V`.
pub struct ThirringPotential<'a> {
    pub alphas: &'a AlphaSet,
    pub lambda: f64,
    pub v: Option<&'a ScalarField>,
}

impl Potential for ThirringPotential<'_> {
    fn apply(&self, _t: f64, node: usize, u: &Spinor) -> Spinor {
        let v = self.v.map_or(0.0, |f| f.data[node]);
        thirring_apply(self.alphas, self.lambda, v, u.norm_sqr(), u.bilinear(&self.alphas.b).re, u)
    }
}

/// `(lambda (rho I - chi b) + v I) u` without forming the matrix.
#[inline]
pub fn thirring_apply(
    alphas: &AlphaSet,
    lambda: f64,
    v: f64,
    density: f64,
    chiral: f64,
    u: &Spinor,
) -> Spinor {
    let bu = alphas.b.apply(u);
    *u * (lambda * density + v) - bu * (lambda * chiral)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    /// `|u|^2`
    Charge,
    /// `u^dag b u`
    Pseudocharge,
}

/// An observable and its time derivative on the spinor grid.
#[derive(Clone, Debug)]
pub struct ObservablePair {
    pub w: ScalarField,
    pub wt: ScalarField,
}

#[derive(Clone, Debug)]
pub struct DiracSolver {
    pub alphas: AlphaSet,
    pub cfl: f64,
}

impl Default for DiracSolver {
    fn default() -> Self {
        Self {
            alphas: AlphaSet::default(),
            cfl: DEFAULT_CFL,
        }
    }
}

impl DiracSolver {
    pub fn new(alphas: AlphaSet, cfl: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= MAX_DIRAC_CFL) {
            return Err(Error::Domain {
                what: "Dirac CFL number",
                value: cfl,
                domain: format!("(0, {MAX_DIRAC_CFL}]"),
            });
        }
        Ok(Self { alphas, cfl })
    }

    /// Largest admissible step for unit characteristic speed.
    pub fn max_dt(&self, grid: &Grid) -> f64 {
        self.cfl * grid.min_active_spacing()
    }

    pub fn rhs(&self, f: &SpinorField, pot: &dyn Potential, t: f64) -> SpinorField {
        let g = &f.grid;
        let active: Vec<usize> = g.active_axes().collect();
        let data = (0..g.len())
            .into_par_iter()
            .map(|idx| {
                let u = &f.data[idx];
                let mut acc = pot.apply(t, idx, u).scale(MINUS_I);
                for &axis in &active {
                    let du = d1_at(f, idx, axis);
                    acc = acc + self.alphas.a[axis].apply(&du);
                }
                acc
            })
            .collect();
        Field {
            grid: g.clone(),
            data,
        }
    }

    /// One classical RK4 step from `t` to `t + dt`.
    pub fn step(&self, f: &SpinorField, pot: &dyn Potential, t: f64, dt: f64) -> Result<SpinorField> {
        let limit = self.max_dt(&f.grid);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl {
                dt,
                limit,
                context: "Dirac RK4 step",
            });
        }
        let k1 = self.rhs(f, pot, t);
        let s1 = axpy(f, &k1, 0.5 * dt);
        let k2 = self.rhs(&s1, pot, t + 0.5 * dt);
        let s2 = axpy(f, &k2, 0.5 * dt);
        let k3 = self.rhs(&s2, pot, t + 0.5 * dt);
        let s3 = axpy(f, &k3, dt);
        let k4 = self.rhs(&s3, pot, t + dt);
        let data = f
            .data
            .par_iter()
            .enumerate()
            .map(|(i, u)| {
                *u + (k1.data[i] + (k2.data[i] + k3.data[i]) * 2.0 + k4.data[i]) * (dt / 6.0)
            })
            .collect();
        Ok(Field {
            grid: f.grid.clone(),
            data,
        })
    }

    /// Advance to `t0 + duration` with equal steps no larger than the CFL limit.
    pub fn evolve(
        &self,
        f: &SpinorField,
        pot: &dyn Potential,
        t0: f64,
        duration: f64,
    ) -> Result<SpinorField> {
        let steps = (duration / self.max_dt(&f.grid)).ceil().max(1.0) as usize;
        let dt = duration / steps as f64;
        let mut cur = f.clone();
        for n in 0..steps {
            cur = self.step(&cur, pot, t0 + n as f64 * dt, dt)?;
        }
        Ok(cur)
    }

    /// The observable at `t = 0` and its time derivative, the latter read off
    /// the first-order conservation law: `w_t = sum_i d_i (u^dag a_i u)` for
    /// the charge and `sum_i d_i (u^dag b a_i u)` for the pseudocharge.
    pub fn initial_observable(&self, f0: &SpinorField, which: Observable) -> ObservablePair {
        let currents: Vec<_> = f0.data.iter().map(|u| self.alphas.currents(u)).collect();
        let w = Field {
            grid: f0.grid.clone(),
            data: currents
                .iter()
                .map(|c| match which {
                    Observable::Charge => c.density,
                    Observable::Pseudocharge => c.chiral,
                })
                .collect(),
        };
        let mut wt = Field::filled(&f0.grid, 0.0);
        for axis in f0.grid.active_axes() {
            let flux = Field {
                grid: f0.grid.clone(),
                data: currents
                    .iter()
                    .map(|c| match which {
                        Observable::Charge => c.alpha[axis],
                        Observable::Pseudocharge => c.chiral_alpha[axis],
                    })
                    .collect(),
            };
            let d = derivative(&flux, axis);
            for (o, v) in wt.data.iter_mut().zip(&d.data) {
                *o += v;
            }
        }
        ObservablePair { w, wt }
    }
}

fn axpy(f: &SpinorField, k: &SpinorField, a: f64) -> SpinorField {
    Field {
        grid: f.grid.clone(),
        data: f
            .data
            .par_iter()
            .zip(&k.data)
            .map(|(u, d)| *u + *d * a)
            .collect(),
    }
}

/// `sum_i a_i d_i u - i B u` with a pointwise matrix potential.
pub fn dirac_rhs(f: &SpinorField, b: &PotentialField, alphas: &AlphaSet) -> Result<SpinorField> {
    f.grid.same_shape(&b.grid)?;
    let solver = DiracSolver {
        alphas: alphas.clone(),
        cfl: DEFAULT_CFL,
    };
    Ok(solver.rhs(f, b, 0.0))
}

/// `Q = sum |u|^2 h1 h2 h3`.
pub fn total_charge(f: &SpinorField) -> f64 {
    f.data.iter().map(Spinor::norm_sqr).sum::<f64>() * f.grid.cell_volume()
}

/// Pointwise observable of a spinor field.
pub fn observable(f: &SpinorField, alphas: &AlphaSet, which: Observable) -> ScalarField {
    f.map(|u| match which {
        Observable::Charge => u.norm_sqr(),
        Observable::Pseudocharge => u.bilinear(&alphas.b).re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::algebra::build_alpha_set;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn generic_spinor() -> Spinor {
        Spinor([c(0.7, 0.1), c(-0.2, 0.4), c(0.3, -0.5), c(0.1, 0.2)])
    }

    #[test]
    fn constant_field_free_rate_is_zero() {
        let g = Grid::cube([8, 4, 2], 1.0).unwrap();
        let f = Field::filled(&g, generic_spinor());
        let b = Field::filled(&g, ComplexMatrix4::zero());
        let r = dirac_rhs(&f, &b, &build_alpha_set()).unwrap();
        assert!(r.data.iter().all(|s| s.norm_sqr() < 1e-28));
    }

    #[test]
    fn constant_scalar_potential_rotates_phase() {
        let g = Grid::cube([8, 1, 1], 1.0).unwrap();
        let f = Field::filled(&g, generic_spinor());
        let b = Field::filled(&g, ComplexMatrix4::scalar(c(1.7, 0.0)));
        let r = dirac_rhs(&f, &b, &build_alpha_set()).unwrap();
        let expected = generic_spinor().scale(c(0.0, -1.7));
        for s in &r.data {
            assert!((*s - expected).norm_sqr() < 1e-28);
        }
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let f = Field::filled(&Grid::cube([8, 1, 1], 1.0).unwrap(), Spinor::zero());
        let b = Field::filled(&Grid::cube([4, 1, 1], 1.0).unwrap(), ComplexMatrix4::zero());
        assert!(matches!(
            dirac_rhs(&f, &b, &build_alpha_set()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let solver = DiracSolver::default();
        let g = Grid::cube([16, 1, 1], 1.0).unwrap();
        let f = Field::filled(&g, Spinor::basis(0));
        let err = solver.step(&f, &FreePotential, 0.0, 0.5 / 16.0).unwrap_err();
        assert!(matches!(err, Error::Cfl { .. }));
        assert!(DiracSolver::new(AlphaSet::default(), 0.6).is_err());
    }

    #[test]
    fn total_charge_counts_nodes() {
        let g = Grid::cube([4, 4, 4], 4.0).unwrap();
        assert_eq!(total_charge(&Field::filled(&g, Spinor::zero())), 0.0);
        assert_eq!(total_charge(&Field::filled(&g, Spinor::basis(0))), 64.0);
    }

    #[test]
    fn constant_observable_has_zero_rate() {
        let g = Grid::cube([8, 8, 1], 1.0).unwrap();
        let f = Field::filled(&g, generic_spinor());
        let obs = DiracSolver::default().initial_observable(&f, Observable::Charge);
        assert!(obs.wt.max_abs() < 1e-13);
        assert!(obs.w.data.iter().all(|&w| (w - generic_spinor().norm_sqr()).abs() < 1e-15));
    }

    #[test]
    fn pseudocharge_of_real_first_component_profile_vanishes() {
        let g = Grid::cube([16, 1, 1], 1.0).unwrap();
        let f = Field::from_fn(&g, |x| Spinor::basis(0) * (1.0 + (2.0 * PI * x[0]).sin()));
        let obs = DiracSolver::default().initial_observable(&f, Observable::Pseudocharge);
        assert!(obs.w.max_abs() == 0.0);
    }

    #[test]
    fn constant_potential_evolution_matches_exact_phase() {
        let solver = DiracSolver::default();
        let g = Grid::cube([8, 1, 1], 1.0).unwrap();
        let f = Field::filled(&g, generic_spinor());
        let v = 2.0;
        let pot = Field::filled(&g, ComplexMatrix4::scalar(c(v, 0.0)));
        let dt = solver.max_dt(&g);
        let out = solver.step(&f, &pot, 0.0, dt).unwrap();
        let exact = generic_spinor().scale(Complex64::from_polar(1.0, -v * dt));
        let err = (out.data[3] - exact).norm_sqr().sqrt();
        // Local RK4 error for y' = -i v y is (v dt)^5 / 120.
        assert!(err < 2.0 * (v * dt).powi(5) / 120.0, "{err}");
    }
}
