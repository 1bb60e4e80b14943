//! Coupling terms between the two grids: the Dirac potential `kappa / rho_re`
//! pulled back to labels, and the mollified short-wave force on the fluid.

use rayon::prelude::*;

use super::mollifier::MollifierKernel;
use crate::error::{Error, Result};
use crate::grid::{gradient, Field, ScalarField, VectorField};
use crate::lagrangian::{InverseMap, LabelField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingParams {
    pub lambda: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl CouplingParams {
    /// `kappa` and `alpha` may be zero, which switches the corresponding
    /// coupling off; negative values are rejected.
    pub fn new(lambda: f64, kappa: f64, alpha: f64, delta: f64, epsilon: f64) -> Result<Self> {
        let p = Self {
            lambda,
            kappa,
            alpha,
            delta,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() {
            return Err(Error::config("lambda", "must be finite"));
        }
        for (key, v) in [("kappa", self.kappa), ("alpha", self.alpha)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("{v} must be a positive constant (or 0 to decouple)")));
            }
        }
        for (key, v) in [("delta", self.delta), ("epsilon", self.epsilon)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("{v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn decoupled(epsilon: f64, delta: f64) -> Self {
        Self {
            lambda: 0.0,
            kappa: 0.0,
            alpha: 0.0,
            delta,
            epsilon,
        }
    }
}

/// `V(y) = kappa / rho_re(x(y))` on every Lagrangian node.
pub fn potential_field(
    rho_re: &ScalarField,
    inverse: &InverseMap<'_>,
    lag: &crate::grid::Grid,
    kappa: f64,
) -> Result<ScalarField> {
    if let Some(bad) = rho_re.data.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::Domain {
            what: "rho_re",
            value: *bad,
            domain: "rho_re > 0".into(),
        });
    }
    let data = (0..lag.len())
        .into_par_iter()
        .map(|idx| {
            let x = inverse.locate(lag.position(idx))?;
            Ok(kappa / rho_re.sample(x))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Field {
        grid: lag.clone(),
        data,
    })
}

/// `w(y(x))` on every Eulerian node.
pub fn shortwave_energy_on_eulerian(w: &ScalarField, labels: &LabelField) -> ScalarField {
    let g = labels.grid();
    let data = (0..g.len())
        .into_par_iter()
        .map(|idx| w.sample(labels.at_node(idx)))
        .collect();
    Field {
        grid: g.clone(),
        data,
    }
}

/// `alpha grad(zeta_delta * w)`.
pub fn force_source(w_eul: &ScalarField, kernel: &MollifierKernel, alpha: f64) -> Result<VectorField> {
    let smooth = kernel.convolve(w_eul)?;
    Ok(gradient(&smooth).map(|g| [alpha * g[0], alpha * g[1], alpha * g[2]]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::mollifier::build_mollifier;
    use crate::grid::Grid;
    use crate::lagrangian::initial_label;
    use std::f64::consts::PI;

    #[test]
    fn params_reject_negative_couplings() {
        assert!(CouplingParams::new(1.0, 1.0, 0.5, 0.1, 1.0).is_ok());
        assert!(CouplingParams::new(0.0, 0.0, 0.0, 0.1, 1.0).is_ok());
        let err = CouplingParams::new(1.0, 1.0, -1.0, 0.1, 1.0).unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "alpha"));
        assert!(CouplingParams::new(1.0, -0.1, 1.0, 0.1, 1.0).is_err());
        assert!(CouplingParams::new(1.0, 1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn potential_of_uniform_density() {
        let g = Grid::cube([4, 4, 8], 1.0).unwrap();
        for (rho, kappa, expect) in [(1.0, 1.0, 1.0), (2.0, 3.0, 1.5)] {
            let r = Field::filled(&g, rho);
            let lf = initial_label(&r).unwrap();
            let lag = lf.lagrangian_grid();
            let v = potential_field(&r, &InverseMap::new(&lf), &lag, kappa).unwrap();
            assert!(v.data.iter().all(|x| (x - expect).abs() < 1e-12));
        }
    }

    #[test]
    fn potential_composes_with_identity_map() {
        let n = 64;
        let g = Grid::new([1, 1, n], [1.0, 1.0, 1.0]).unwrap();
        let r = Field::from_fn(&g, |x| 1.0 + 0.5 * (2.0 * PI * x[2]).sin());
        let lf = LabelField::identity(&g);
        let lag = lf.lagrangian_grid();
        let v = potential_field(&r, &InverseMap::new(&lf), &lag, 2.0).unwrap();
        for idx in 0..lag.len() {
            let y = lag.position(idx);
            let exact = 2.0 / (1.0 + 0.5 * (2.0 * PI * y[2]).sin());
            assert!((v.data[idx] - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn potential_rejects_nonpositive_density() {
        let g = Grid::cube([2, 2, 2], 1.0).unwrap();
        let lf = LabelField::identity(&g);
        let mut r = Field::filled(&g, 1.0);
        r.data[3] = 0.0;
        assert!(matches!(
            potential_field(&r, &InverseMap::new(&lf), &g, 1.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn composition_with_identity_and_constants() {
        let g = Grid::cube([6, 6, 6], 1.0).unwrap();
        let lf = LabelField::identity(&g);
        let w = Field::from_fn(&g, |x| x[0] + 2.0 * x[1] * x[2]);
        assert_eq!(shortwave_energy_on_eulerian(&w, &lf).data, w.data);
        let lf2 = LabelField::affine(&g, 2.0);
        let c2 = Field::filled(&lf2.lagrangian_grid(), 0.7);
        assert!(shortwave_energy_on_eulerian(&c2, &lf2).data.iter().all(|v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn affine_composition_doubles_frequency() {
        let mut errs = Vec::new();
        for n in [32usize, 64, 128] {
            let g = Grid::new([1, 1, n], [1.0, 1.0, 1.0]).unwrap();
            let lf = LabelField::affine(&g, 2.0);
            let lag = lf.lagrangian_grid();
            let ly = lag.lengths()[2];
            let w = Field::from_fn(&lag, |y| (2.0 * PI * y[2] / ly).cos());
            let out = shortwave_energy_on_eulerian(&w, &lf);
            let exact = Field::from_fn(&g, |x| (4.0 * PI * x[2] / ly).cos());
            errs.push(out.l2_distance(&exact).unwrap());
        }
        // Nodes of the Eulerian grid land on Lagrangian nodes exactly here.
        assert!(errs.iter().all(|e| *e < 1e-12));
    }

    #[test]
    fn force_of_constant_vanishes() {
        let g = Grid::cube([8, 8, 8], 1.0).unwrap();
        let k = build_mollifier(0.25, &g).unwrap();
        let f = force_source(&Field::filled(&g, 2.0), &k, 0.3).unwrap();
        assert!(f.data.iter().all(|v| v.iter().all(|c| c.abs() < 1e-13)));
    }

    #[test]
    fn force_of_cosine_matches_convolution_theorem() {
        let mut errs = Vec::new();
        for n in [32usize, 64] {
            let g = Grid::new([n, 1, 1], [1.0, 1.0, 1.0]).unwrap();
            let k = build_mollifier(0.25, &g).unwrap();
            let alpha = 0.7;
            let w = Field::from_fn(&g, |x| (2.0 * PI * x[0]).cos());
            let f = force_source(&w, &k, alpha).unwrap();
            let ghat = k.symbol([2.0 * PI, 0.0, 0.0]);
            let exact = Field::from_fn(&g, |x| -alpha * ghat * 2.0 * PI * (2.0 * PI * x[0]).sin());
            let f1 = Field::component(&f, 0);
            errs.push(f1.l2_distance(&exact).unwrap());
            for comp in 1..3 {
                assert!(Field::component(&f, comp).max_abs() < 1e-12);
            }
            // Integral of a periodic gradient.
            for comp in 0..3 {
                assert!(Field::component(&f, comp).integral().abs() < 1e-13);
            }
        }
        // Only the fourth-order derivative error remains.
        assert!(errs[0] < 1e-3);
        assert!((errs[0] / errs[1]).log2() > 3.7);
    }
}
