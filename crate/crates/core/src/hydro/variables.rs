//! Primitive, conserved and auxiliary relativistic variables of the
//! special-relativistic Euler system and the maps between them.
//!
//! With `G = (rho + eps^2 p) / (1 - eps^2 |u|^2)` the conserved pair is
//! `D = G - eps^2 p`, `S = G u`. The auxiliary variables
//!
//! ```text
//! rho_re = (rho + eps^4 |u|^2 p) / (1 - eps^2 |u|^2)
//! u_re   = (rho + eps^2 p) / (rho + eps^4 |u|^2 p) u
//! P~     = rho_re eps^2 p (eps^2 |u|^2 - 1) / (rho + eps^2 p) u_re ⊗ u_re
//! ```
//!
//! satisfy `rho_re = D` and `rho_re u_re = S` identically, and make the
//! momentum flux read `rho_re u_re ⊗ u_re + P~ + p I`, the same shape as the
//! classical Euler flux. The factor `p` in `P~` is required for that last
//! identity to hold: `rho_re - G = -eps^2 p`.

use crate::error::{Error, Result};
use crate::hydro::eos::Eos;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conserved {
    pub d: f64,
    pub s: [f64; 3],
}

/// Auxiliary triple `(rho_re, u_re, P~)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelState {
    pub rho_re: f64,
    pub u_re: [f64; 3],
    pub p_tilde: [[f64; 3]; 3],
}

/// Which pressure-loss tensor [`RelEuler::rel_variables_with`] builds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PressureLossForm {
    /// Carries the factor `p`; reproduces the conservative momentum flux.
    #[default]
    Corrected,
    /// The variant without the factor `p`. Kept as a negative control.
    WithoutPressure,
    /// Corrected magnitude with the opposite sign. Negative control.
    SignFlipped,
}

impl std::str::FromStr for PressureLossForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected" => Ok(Self::Corrected),
            "without_pressure" => Ok(Self::WithoutPressure),
            "sign_flipped" => Ok(Self::SignFlipped),
            other => Err(Error::config(
                "ptilde_form",
                format!("expected corrected | without_pressure | sign_flipped, got `{other}`"),
            )),
        }
    }
}

impl PressureLossForm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Corrected => "corrected",
            Self::WithoutPressure => "without_pressure",
            Self::SignFlipped => "sign_flipped",
        }
    }
}

#[inline]
pub fn norm2(u: &[f64; 3]) -> f64 {
    u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
}

impl Conserved {
    pub const ZERO: Conserved = Conserved { d: 0.0, s: [0.0; 3] };

    #[inline]
    pub fn axpy(&self, a: f64, other: &Conserved) -> Conserved {
        Conserved {
            d: self.d + a * other.d,
            s: [
                self.s[0] + a * other.s[0],
                self.s[1] + a * other.s[1],
                self.s[2] + a * other.s[2],
            ],
        }
    }

    #[inline]
    pub fn scale(&self, a: f64) -> Conserved {
        Conserved {
            d: a * self.d,
            s: [a * self.s[0], a * self.s[1], a * self.s[2]],
        }
    }
}

/// Newton controls for conservative-to-primitive recovery.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecoveryOptions {
    /// Stop once `|f(rho)| <= tol * D`.
    pub tol: f64,
    pub max_iter: usize,
    /// Recovered densities at or below `rho_min + floor` are rejected.
    pub floor: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            floor: 1e-8,
        }
    }
}

/// The fluid model: inverse light speed, pressure law and recovery controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelEuler {
    pub eps: f64,
    pub eos: Eos,
    pub recovery: RecoveryOptions,
}

impl RelEuler {
    pub fn new(eps: f64, eos: Eos) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Domain {
                what: "epsilon",
                value: eps,
                domain: "(0, inf)".into(),
            });
        }
        eos.validate(eps)?;
        Ok(Self {
            eps,
            eos,
            recovery: RecoveryOptions::default(),
        })
    }

    /// Upper bound on every characteristic speed: `c = 1/eps`.
    pub fn max_signal_speed(&self) -> f64 {
        1.0 / self.eps
    }

    /// Checks the physical domain and returns `(p, G)`.
    fn pressure_and_enthalpy(&self, s: &Primitive) -> Result<(f64, f64)> {
        let (p, _) = self.eos.eval(s.rho)?;
        let e2 = self.eps * self.eps;
        let beta2 = e2 * norm2(&s.u);
        if !(beta2 < 1.0) {
            return Err(Error::Domain {
                what: "eps |u|",
                value: beta2.sqrt(),
                domain: "[0, 1)".into(),
            });
        }
        Ok((p, (s.rho + e2 * p) / (1.0 - beta2)))
    }

    pub fn prim_to_cons(&self, s: &Primitive) -> Result<Conserved> {
        let (p, g) = self.pressure_and_enthalpy(s)?;
        Ok(Conserved {
            d: g - self.eps * self.eps * p,
            s: [g * s.u[0], g * s.u[1], g * s.u[2]],
        })
    }

    pub fn rel_variables(&self, s: &Primitive) -> Result<RelState> {
        self.rel_variables_with(s, PressureLossForm::Corrected)
    }

    pub fn rel_variables_with(&self, s: &Primitive, form: PressureLossForm) -> Result<RelState> {
        let (p, _) = self.pressure_and_enthalpy(s)?;
        let e2 = self.eps * self.eps;
        let u2 = norm2(&s.u);
        let denom = s.rho + e2 * e2 * u2 * p;
        let rho_re = denom / (1.0 - e2 * u2);
        let ratio = (s.rho + e2 * p) / denom;
        let u_re = [ratio * s.u[0], ratio * s.u[1], ratio * s.u[2]];
        let base = rho_re * e2 * (e2 * u2 - 1.0) / (s.rho + e2 * p);
        let coef = match form {
            PressureLossForm::Corrected => base * p,
            PressureLossForm::WithoutPressure => base,
            PressureLossForm::SignFlipped => -base * p,
        };
        let mut p_tilde = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                p_tilde[j][k] = coef * u_re[j] * u_re[k];
            }
        }
        Ok(RelState {
            rho_re,
            u_re,
            p_tilde,
        })
    }

    /// Mass flux and momentum-row fluxes along `axis`:
    /// `G u_k` and `G u_j u_k + p delta_jk`.
    pub fn flux(&self, s: &Primitive, axis: usize) -> Result<Conserved> {
        let (p, g) = self.pressure_and_enthalpy(s)?;
        Ok(self.flux_from(s, p, g, axis))
    }

    #[inline]
    fn flux_from(&self, s: &Primitive, p: f64, g: f64, axis: usize) -> Conserved {
        let m = g * s.u[axis];
        let mut f = Conserved {
            d: m,
            s: [m * s.u[0], m * s.u[1], m * s.u[2]],
        };
        f.s[axis] += p;
        f
    }

    /// Conserved state and flux along `axis` in one pass.
    pub fn state_and_flux(&self, s: &Primitive, axis: usize) -> Result<(Conserved, Conserved)> {
        let (p, g) = self.pressure_and_enthalpy(s)?;
        let u = Conserved {
            d: g - self.eps * self.eps * p,
            s: [g * s.u[0], g * s.u[1], g * s.u[2]],
        };
        Ok((u, self.flux_from(s, p, g, axis)))
    }

    /// Full 3x3 momentum flux `G u ⊗ u + p I`.
    pub fn momentum_flux(&self, s: &Primitive) -> Result<[[f64; 3]; 3]> {
        let (p, g) = self.pressure_and_enthalpy(s)?;
        let mut m = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in 0..3 {
                m[j][k] = g * s.u[j] * s.u[k] + if j == k { p } else { 0.0 };
            }
        }
        Ok(m)
    }

    /// Recovers `(rho, u)` from `(D, S)` by safeguarded Newton iteration on
    /// `f(rho) = D - rho - eps^2 |S|^2 / (D + eps^2 p(rho))`.
    ///
    /// `f` is strictly decreasing on the physical interval, so the root is
    /// bracketed by `[rho_min, min(D, rho_max)]` and bisection is used
    /// whenever a Newton step leaves the bracket.
    pub fn cons_to_prim(&self, cs: &Conserved) -> Result<Primitive> {
        self.cons_to_prim_cell(cs, 0)
    }

    pub fn cons_to_prim_cell(&self, cs: &Conserved, cell: usize) -> Result<Primitive> {
        let s2 = norm2(&cs.s);
        let fail = |reason: String| Error::Recovery {
            cell,
            d: cs.d,
            s_norm: s2.sqrt(),
            reason,
        };
        if !(cs.d > 0.0 && cs.d.is_finite() && s2.is_finite()) {
            return Err(fail("D must be positive and finite".into()));
        }
        let e2 = self.eps * self.eps;
        let d = cs.d;
        let eos = &self.eos;
        let f = |rho: f64| {
            let (p, dp) = eos.pressure(rho);
            let q = d + e2 * p;
            (d - rho - e2 * s2 / q, -1.0 + e2 * e2 * s2 * dp / (q * q))
        };

        let mut lo = self.eos.rho_min;
        let mut hi = d.min(self.eos.rho_max);
        if !(hi > lo) {
            return Err(fail("no admissible density below D".into()));
        }
        let mut rho = (d - e2 * s2 / d).clamp(lo, hi);
        if rho <= lo {
            rho = 0.5 * (lo + hi);
        }
        let tol = self.recovery.tol * d;
        let mut converged = false;
        for _ in 0..self.recovery.max_iter {
            let (fv, dfv) = f(rho);
            if fv.abs() <= tol {
                converged = true;
                break;
            }
            if fv > 0.0 {
                lo = rho;
            } else {
                hi = rho;
            }
            let mut next = rho - fv / dfv;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - rho).abs() <= 1e-16 * rho.abs() {
                rho = next;
                converged = f(rho).0.abs() <= tol;
                break;
            }
            rho = next;
        }
        if !converged {
            return Err(fail(format!(
                "Newton did not converge in {} iterations (last rho = {rho})",
                self.recovery.max_iter
            )));
        }
        if !(rho > self.eos.rho_min + self.recovery.floor) || !(rho < self.eos.rho_max) {
            return Err(fail(format!("recovered density {rho} is outside the admissible interval")));
        }
        let (p, _) = self.eos.pressure(rho);
        let g = d + e2 * p;
        let u = [cs.s[0] / g, cs.s[1] / g, cs.s[2] / g];
        if !(e2 * norm2(&u) < 1.0) {
            return Err(fail("recovered velocity is superluminal".into()));
        }
        Ok(Primitive { rho, u })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> RelEuler {
        RelEuler::new(1.0, Eos::linear(0.25)).unwrap()
    }

    const REF: Primitive = Primitive {
        rho: 1.0,
        u: [0.5, 0.0, 0.0],
    };

    #[test]
    fn rest_state_maps_to_density() {
        let m = model();
        let c = m.prim_to_cons(&Primitive { rho: 1.3, u: [0.0; 3] }).unwrap();
        assert!((c.d - 1.3).abs() < 1e-15);
        assert_eq!(c.s, [0.0; 3]);
    }

    #[test]
    fn nonrelativistic_limit_of_conserved_map() {
        let m = RelEuler::new(1e-8, Eos::linear(0.25)).unwrap();
        let s = Primitive {
            rho: 1.2,
            u: [0.3, -0.4, 0.1],
        };
        let c = m.prim_to_cons(&s).unwrap();
        assert!((c.d - 1.2).abs() < 1e-12);
        for j in 0..3 {
            assert!((c.s[j] - 1.2 * s.u[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_state_conserved_values() {
        // G = 1.25 / 0.75 = 5/3, D = 5/3 - 1/4 = 17/12, S1 = 5/6.
        let c = model().prim_to_cons(&REF).unwrap();
        assert!((c.d - 17.0 / 12.0).abs() < 1e-15);
        assert!((c.s[0] - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn reference_state_auxiliary_values() {
        let r = model().rel_variables(&REF).unwrap();
        assert!((r.rho_re - 17.0 / 12.0).abs() < 1e-15);
        assert!((r.u_re[0] - 10.0 / 17.0).abs() < 1e-15);
        // (17/12)(1/4)(-3/4)/(5/4)(10/17)^2 = -5/68
        assert!((r.p_tilde[0][0] + 5.0 / 68.0).abs() < 1e-15);
        assert!((r.p_tilde[0][0] + 0.073529).abs() < 1e-6);
    }

    #[test]
    fn rest_state_auxiliary_values() {
        let r = model().rel_variables(&Primitive { rho: 2.0, u: [0.0; 3] }).unwrap();
        assert_eq!(r.rho_re, 2.0);
        assert_eq!(r.u_re, [0.0; 3]);
        assert_eq!(r.p_tilde, [[0.0; 3]; 3]);
    }

    #[test]
    fn reference_state_momentum_flux() {
        let f = model().flux(&REF, 0).unwrap();
        assert!((f.s[0] - (5.0 / 12.0 + 0.25)).abs() < 1e-15);
        assert!((f.d - 5.0 / 6.0).abs() < 1e-15);
        let z = model().flux(&Primitive { rho: 1.0, u: [0.0; 3] }, 1).unwrap();
        assert_eq!(z.d, 0.0);
        assert_eq!(z.s, [0.0, 0.25, 0.0]);
    }

    #[test]
    fn superluminal_velocity_is_rejected() {
        let err = model()
            .prim_to_cons(&Primitive { rho: 1.0, u: [0.8, 0.7, 0.0] })
            .unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn recovery_of_reference_states() {
        let m = model();
        let p = m.cons_to_prim(&Conserved { d: 1.0, s: [0.0; 3] }).unwrap();
        assert!((p.rho - 1.0).abs() < 1e-14 && p.u == [0.0; 3]);
        let p = m
            .cons_to_prim(&Conserved {
                d: 17.0 / 12.0,
                s: [5.0 / 6.0, 0.0, 0.0],
            })
            .unwrap();
        assert!((p.rho - 1.0).abs() < 1e-12);
        assert!((p.u[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn recovery_rejects_nonphysical_input() {
        let m = model();
        assert!(matches!(
            m.cons_to_prim(&Conserved { d: -1.0, s: [0.0; 3] }),
            Err(Error::Recovery { .. })
        ));
        // |S| far beyond D has no subluminal preimage.
        assert!(m.cons_to_prim(&Conserved { d: 1.0, s: [5.0, 0.0, 0.0] }).is_err());
    }

    #[test]
    fn recovery_rejects_density_at_floor() {
        let mut m = model();
        m.recovery.floor = 0.5;
        let c = m.prim_to_cons(&Primitive { rho: 0.4, u: [0.0; 3] }).unwrap();
        assert!(matches!(m.cons_to_prim_cell(&c, 17), Err(Error::Recovery { cell: 17, .. })));
    }

    #[test]
    fn negative_controls_break_flux_identity() {
        let m = model();
        let flux = m.momentum_flux(&REF).unwrap();
        for form in [PressureLossForm::WithoutPressure, PressureLossForm::SignFlipped] {
            let r = m.rel_variables_with(&REF, form).unwrap();
            let alt = r.rho_re * r.u_re[0] * r.u_re[0] + r.p_tilde[0][0] + 0.25;
            assert!((alt - flux[0][0]).abs() > 0.05, "{form:?}");
        }
    }
}
