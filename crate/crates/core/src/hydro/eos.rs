use crate::error::{Error, Result};

/// Barotropic pressure law `p(rho)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PressureLaw {
    /// `p = sigma2 * rho`
    Linear { sigma2: f64 },
    /// `p = k * rho^gamma`
    Polytropic { k: f64, gamma: f64 },
}

/// A pressure law together with its admissible density interval `(rho_min, rho_max)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eos {
    pub law: PressureLaw,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl Eos {
    pub fn linear(sigma2: f64) -> Self {
        Self {
            law: PressureLaw::Linear { sigma2 },
            rho_min: 0.0,
            rho_max: f64::INFINITY,
        }
    }

    pub fn with_bounds(mut self, rho_min: f64, rho_max: f64) -> Self {
        self.rho_min = rho_min;
        self.rho_max = rho_max;
        self
    }

    /// Pressure and its derivative, no domain check.
    #[inline]
    pub fn pressure(&self, rho: f64) -> (f64, f64) {
        match self.law {
            PressureLaw::Linear { sigma2 } => (sigma2 * rho, sigma2),
            PressureLaw::Polytropic { k, gamma } => {
                let p = k * rho.powf(gamma);
                (p, gamma * p / rho)
            }
        }
    }

    pub fn contains(&self, rho: f64) -> bool {
        rho > self.rho_min && rho < self.rho_max
    }

    pub fn eval(&self, rho: f64) -> Result<(f64, f64)> {
        if !self.contains(rho) {
            return Err(Error::Domain {
                what: "density",
                value: rho,
                domain: format!("({}, {})", self.rho_min, self.rho_max),
            });
        }
        Ok(self.pressure(rho))
    }

    /// Checks `p > 0` and `0 < p' < c^2` with `c = 1/eps` over the interval.
    ///
    /// Both built-in laws have monotone `p'`, so the endpoints decide.
    pub fn validate(&self, eps: f64) -> Result<()> {
        if !(self.rho_min >= 0.0 && self.rho_max > self.rho_min) {
            return Err(Error::Invalid(format!(
                "empty density interval ({}, {})",
                self.rho_min, self.rho_max
            )));
        }
        let c2 = 1.0 / (eps * eps);
        match self.law {
            PressureLaw::Linear { sigma2 } => {
                if !(sigma2 > 0.0 && sigma2 < c2) {
                    return Err(Error::Domain {
                        what: "sigma2",
                        value: sigma2,
                        domain: format!("(0, 1/eps^2 = {c2})"),
                    });
                }
            }
            PressureLaw::Polytropic { k, gamma } => {
                if !(k > 0.0 && gamma >= 1.0) {
                    return Err(Error::Invalid(format!(
                        "polytrope needs k > 0 and gamma >= 1 (k = {k}, gamma = {gamma})"
                    )));
                }
                let top = if gamma > 1.0 { self.rho_max } else { 1.0 };
                let dp_max = if top.is_finite() {
                    self.pressure(top).1
                } else {
                    f64::INFINITY
                };
                if !(dp_max <= c2) {
                    return Err(Error::Domain {
                        what: "sound speed squared at rho_max",
                        value: dp_max,
                        domain: format!("below 1/eps^2 = {c2}"),
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_law_values() {
        let eos = Eos::linear(0.25);
        assert_eq!(eos.eval(1.0).unwrap(), (0.25, 0.25));
    }

    #[test]
    fn lower_endpoint_is_excluded() {
        let eos = Eos::linear(0.25);
        match eos.eval(0.0) {
            Err(Error::Domain { value, .. }) => assert_eq!(value, 0.0),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn subluminal_sound_speed() {
        assert!(Eos::linear(0.25).validate(1.0).is_ok());
        assert!(Eos::linear(1.5).validate(1.0).is_err());
        assert!(Eos::linear(50.0).validate(0.1).is_ok());
    }

    #[test]
    fn polytrope_needs_bounded_interval() {
        let eos = Eos {
            law: PressureLaw::Polytropic { k: 0.1, gamma: 2.0 },
            rho_min: 0.0,
            rho_max: f64::INFINITY,
        };
        assert!(eos.validate(1.0).is_err());
        assert!(eos.with_bounds(0.0, 4.0).validate(1.0).is_ok());
        let (p, dp) = eos.pressure(2.0);
        assert!((p - 0.4).abs() < 1e-15 && (dp - 0.4).abs() < 1e-15);
    }
}
