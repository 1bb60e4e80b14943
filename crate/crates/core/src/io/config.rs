//! `key=value` run configuration with `#` comments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::coupling::CouplingParams;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hydro::{Eos, PressureLossForm, RelEuler};
use crate::scenarios::{FluidIc, FluidSetup, SpinorIc, SpinorSetup};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Coevolve,
    Picard,
    EulerOnly,
    DiracOnly,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Coevolve => "coevolve",
            Mode::Picard => "picard",
            Mode::EulerOnly => "euler-only",
            Mode::DiracOnly => "dirac-only",
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "coevolve" => Ok(Mode::Coevolve),
            "picard" => Ok(Mode::Picard),
            "euler-only" => Ok(Mode::EulerOnly),
            "dirac-only" => Ok(Mode::DiracOnly),
            _ => Err("expected one of: coevolve, picard, euler-only, dirac-only".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: [usize; 3],
    pub length: f64,
    pub epsilon: f64,
    pub sigma2: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub alpha: f64,
    /// `None` means four times the largest active spacing.
    pub delta: Option<f64>,
    pub cfl: f64,
    pub dirac_cfl: f64,
    pub t_final: f64,
    pub recovery_tol: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub fluid: FluidSetup,
    pub spinor: SpinorSetup,
    pub output_every: usize,
    pub snapshots: bool,
    pub output_dir: String,
    pub mode: Mode,
    pub ptilde_form: PressureLossForm,
    pub seed: u64,
}

/// Every key with its default (`None` when required) and a one-line description.
pub const KEYS: &[(&str, Option<&str>, &str)] = &[
    ("n1", Some("1"), "nodes along x1 (N sets n1, n2 and n3 at once)"),
    ("n2", Some("1"), "nodes along x2"),
    ("n3", Some("64"), "nodes along x3"),
    ("length", Some("1.0"), "side length L of the periodic box"),
    ("epsilon", None, "inverse light speed, > 0"),
    ("sigma2", None, "sound speed squared of the linear law p = sigma2 rho, 0 < sigma2 < 1/epsilon^2"),
    ("lambda", Some("1.0"), "Thirring self-interaction constant"),
    ("kappa", Some("1.0"), "potential coupling, >= 0"),
    ("alpha", Some("0.05"), "force coupling, >= 0"),
    ("delta", Some("auto"), "mollifier width, >= 2 h (auto = 4 h)"),
    ("cfl", Some("0.4"), "fluid Courant number, in (0, 1]"),
    ("dirac_cfl", Some("0.4"), "Dirac Courant number, in (0, 0.5]"),
    ("t_final", Some("0.1"), "final time"),
    ("recovery_tol", Some("1e-12"), "relative tolerance of primitive recovery"),
    ("picard_tol", Some("1e-8"), "Picard stopping distance"),
    ("picard_max_iter", Some("30"), "Picard iteration cap"),
    ("fluid_ic", Some("density_sine"), "uniform | acoustic_pulse | density_sine"),
    ("fluid_amplitude", Some("0.2"), "density perturbation amplitude"),
    ("fluid_velocity", Some("0.0"), "background velocity along x3"),
    ("spinor_ic", Some("gaussian_packet"), "plane_wave | gaussian_packet"),
    ("spinor_amplitude", Some("1.0"), "spinor amplitude"),
    ("spinor_width", Some("0.15"), "packet width as a fraction of the box, in (0, 0.5)"),
    ("spinor_mode", Some("1"), "plane-wave mode number along y3"),
    ("output_every", Some("10"), "steps between diagnostics rows"),
    ("snapshots", Some("true"), "write field snapshots at diagnostics times"),
    ("output_dir", Some("out"), "output directory (overridden by --out)"),
    ("mode", Some("coevolve"), "coevolve | picard | euler-only | dirac-only"),
    ("ptilde_form", Some("corrected"), "pressure-loss tensor used by the audit: corrected | without_pressure | sign_flipped"),
    ("seed", Some("0"), "seed for randomized checks"),
];

/// Text for `--help`: every key with its default.
pub fn keys_help() -> String {
    let mut s = String::from("Configuration keys (key=value, '#' starts a comment):\n");
    for (k, d, doc) in KEYS {
        let d = d.map_or("required".to_string(), |d| format!("default {d}"));
        s.push_str(&format!("  {k:<17} {doc} [{d}]\n"));
    }
    s
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| Error::config(key, format!("cannot parse `{raw}`: {e}")))
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

impl RunConfig {
    /// The defaults plus `epsilon = 1`, `sigma2 = 0.25`.
    pub fn example() -> Self {
        Self::parse("epsilon=1.0\nsigma2=0.25\n").expect("defaults are valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut given: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::config(
                    format!("line {}", lineno + 1),
                    format!("expected key=value, got `{line}`"),
                ));
            };
            let (k, v) = (k.trim(), v.trim());
            if k != "N" && !KEYS.iter().any(|(name, _, _)| *name == k) {
                return Err(Error::config(k, "unknown key"));
            }
            if given.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::config(k, "given more than once"));
            }
        }
        if let Some(n) = given.remove("N") {
            for axis in ["n1", "n2", "n3"] {
                if given.contains_key(axis) {
                    return Err(Error::config("N", format!("conflicts with `{axis}`")));
                }
                given.insert(axis.to_string(), n.clone());
            }
        }
        let get = |key: &str| -> Result<String> {
            if let Some(v) = given.get(key) {
                return Ok(v.clone());
            }
            let (_, default, _) = KEYS.iter().find(|(k, _, _)| *k == key).expect("known key");
            default
                .map(str::to_string)
                .ok_or_else(|| Error::config(key, "required key is missing"))
        };
        let f = |key: &str| -> Result<f64> { parse_value::<f64>(key, &get(key)?) };
        let u = |key: &str| -> Result<usize> { parse_value::<usize>(key, &get(key)?) };
        let delta = match get("delta")?.as_str() {
            "auto" => None,
            raw => Some(parse_value::<f64>("delta", raw)?),
        };
        let cfg = RunConfig {
            n: [u("n1")?, u("n2")?, u("n3")?],
            length: f("length")?,
            epsilon: f("epsilon")?,
            sigma2: f("sigma2")?,
            lambda: f("lambda")?,
            kappa: f("kappa")?,
            alpha: f("alpha")?,
            delta,
            cfl: f("cfl")?,
            dirac_cfl: f("dirac_cfl")?,
            t_final: f("t_final")?,
            recovery_tol: f("recovery_tol")?,
            picard_tol: f("picard_tol")?,
            picard_max_iter: u("picard_max_iter")?,
            fluid: FluidSetup {
                kind: parse_value::<FluidIc>("fluid_ic", &get("fluid_ic")?)?,
                amplitude: f("fluid_amplitude")?,
                velocity: f("fluid_velocity")?,
            },
            spinor: SpinorSetup {
                kind: parse_value::<SpinorIc>("spinor_ic", &get("spinor_ic")?)?,
                amplitude: f("spinor_amplitude")?,
                width: f("spinor_width")?,
                mode: parse_value::<i64>("spinor_mode", &get("spinor_mode")?)?,
            },
            output_every: u("output_every")?,
            snapshots: parse_value::<bool>("snapshots", &get("snapshots")?)?,
            output_dir: get("output_dir")?,
            mode: parse_value::<Mode>("mode", &get("mode")?)?,
            ptilde_form: parse_value::<PressureLossForm>("ptilde_form", &get("ptilde_form")?)?,
            seed: parse_value::<u64>("seed", &get("seed")?)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text: every key in table order, shortest round-trip floats.
    pub fn serialize(&self) -> String {
        let vals: Vec<(&str, String)> = vec![
            ("n1", self.n[0].to_string()),
            ("n2", self.n[1].to_string()),
            ("n3", self.n[2].to_string()),
            ("length", fmt_f64(self.length)),
            ("epsilon", fmt_f64(self.epsilon)),
            ("sigma2", fmt_f64(self.sigma2)),
            ("lambda", fmt_f64(self.lambda)),
            ("kappa", fmt_f64(self.kappa)),
            ("alpha", fmt_f64(self.alpha)),
            ("delta", self.delta.map_or("auto".into(), fmt_f64)),
            ("cfl", fmt_f64(self.cfl)),
            ("dirac_cfl", fmt_f64(self.dirac_cfl)),
            ("t_final", fmt_f64(self.t_final)),
            ("recovery_tol", fmt_f64(self.recovery_tol)),
            ("picard_tol", fmt_f64(self.picard_tol)),
            ("picard_max_iter", self.picard_max_iter.to_string()),
            ("fluid_ic", self.fluid.kind.name().into()),
            ("fluid_amplitude", fmt_f64(self.fluid.amplitude)),
            ("fluid_velocity", fmt_f64(self.fluid.velocity)),
            ("spinor_ic", self.spinor.kind.name().into()),
            ("spinor_amplitude", fmt_f64(self.spinor.amplitude)),
            ("spinor_width", fmt_f64(self.spinor.width)),
            ("spinor_mode", self.spinor.mode.to_string()),
            ("output_every", self.output_every.to_string()),
            ("snapshots", self.snapshots.to_string()),
            ("output_dir", self.output_dir.clone()),
            ("mode", self.mode.name().into()),
            ("ptilde_form", self.ptilde_form.name().into()),
            ("seed", self.seed.to_string()),
        ];
        debug_assert_eq!(vals.len(), KEYS.len());
        vals.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, [self.length; 3])
    }

    pub fn model(&self) -> Result<RelEuler> {
        let mut m = RelEuler::new(self.epsilon, Eos::linear(self.sigma2))?;
        m.recovery.tol = self.recovery_tol;
        Ok(m)
    }

    pub fn resolved_delta(&self) -> Result<f64> {
        Ok(self.delta.unwrap_or(4.0 * self.grid()?.max_active_spacing()))
    }

    pub fn coupling(&self) -> Result<CouplingParams> {
        CouplingParams::new(self.lambda, self.kappa, self.alpha, self.resolved_delta()?, self.epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.iter().any(|&n| n == 0) {
            return Err(Error::config("n1", "node counts must be at least 1"));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::config("length", "must be positive"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2 * self.epsilon * self.epsilon < 1.0) {
            return Err(Error::config("sigma2", "need 0 < sigma2 < 1/epsilon^2 (subluminal sound)"));
        }
        self.coupling()?;
        let h = self.grid()?.max_active_spacing();
        if let Some(d) = self.delta {
            if !(d >= 2.0 * h * (1.0 - 1e-12)) {
                return Err(Error::config("delta", format!("must be at least 2 h = {}", 2.0 * h)));
            }
        }
        let in_range = |key: &str, v: f64, lo: f64, hi: f64| -> Result<()> {
            if v > lo && v <= hi {
                Ok(())
            } else {
                Err(Error::config(key, format!("{v} must lie in ({lo}, {hi}]")))
            }
        };
        in_range("cfl", self.cfl, 0.0, 1.0)?;
        in_range("dirac_cfl", self.dirac_cfl, 0.0, crate::dirac::solver::MAX_DIRAC_CFL)?;
        in_range("t_final", self.t_final, 0.0, f64::MAX)?;
        in_range("recovery_tol", self.recovery_tol, 0.0, 1e-6)?;
        in_range("picard_tol", self.picard_tol, 0.0, f64::MAX)?;
        if self.picard_max_iter == 0 {
            return Err(Error::config("picard_max_iter", "must be at least 1"));
        }
        if self.output_every == 0 {
            return Err(Error::config("output_every", "must be at least 1"));
        }
        let a = self.fluid.amplitude;
        let ok = match self.fluid.kind {
            FluidIc::Uniform => true,
            FluidIc::DensitySine => a.abs() < 1.0,
            FluidIc::AcousticPulse => a > -1.0,
        };
        if !ok || !a.is_finite() {
            return Err(Error::config("fluid_amplitude", "density would not stay positive"));
        }
        let sound = self.sigma2.sqrt();
        let vmax = self.fluid.velocity.abs()
            + if self.fluid.kind == FluidIc::AcousticPulse { sound * a.abs() } else { 0.0 };
        if !(self.epsilon * vmax < 1.0) {
            return Err(Error::config("fluid_velocity", "initial speed must stay below 1/epsilon"));
        }
        if !(self.spinor.width > 0.0 && self.spinor.width < 0.5) {
            return Err(Error::config("spinor_width", "must lie in (0, 0.5)"));
        }
        if !self.spinor.amplitude.is_finite() {
            return Err(Error::config("spinor_amplitude", "must be finite"));
        }
        if self.output_dir.is_empty() || self.output_dir.contains(['\n', '#', '=']) {
            return Err(Error::config("output_dir", "must be a plain non-empty path"));
        }
        Ok(())
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_text_gets_defaults() {
        let c = RunConfig::parse("epsilon=1.0\nsigma2=0.25\nN=32").unwrap();
        assert_eq!(c.n, [32, 32, 32]);
        assert_eq!(c.mode, Mode::Coevolve);
        assert_eq!(c.delta, None);
        assert_eq!(c.resolved_delta().unwrap(), 4.0 / 32.0);
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = RunConfig::parse("# header\n\nepsilon = 0.5  # inline\nsigma2=1\n").unwrap();
        assert_eq!(c.epsilon, 0.5);
        assert_eq!(c.sigma2, 1.0);
    }

    #[test]
    fn errors_name_the_key() {
        let key_of = |text: &str| match RunConfig::parse(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(key_of("epsilon=1\nsigma2=0.25\nalpha=-1"), "alpha");
        assert_eq!(key_of("epsilon=1\nsigma2=0.25\nbogus=3"), "bogus");
        assert_eq!(key_of("sigma2=0.25"), "epsilon");
        assert_eq!(key_of("epsilon=1"), "sigma2");
        assert_eq!(key_of("epsilon=1\nsigma2=2"), "sigma2");
        assert_eq!(key_of("epsilon=1\nsigma2=0.25\nN=8\nn1=4"), "N");
        assert_eq!(key_of("epsilon=1\nsigma2=0.25\nepsilon=2"), "epsilon");
        assert_eq!(key_of("epsilon=1\nsigma2=0.25\nmode=fast"), "mode");
        assert_eq!(key_of("epsilon=1\nsigma2=0.25\ndelta=0.001"), "delta");
        assert_eq!(key_of("epsilon=1\nsigma2=0.25\ndirac_cfl=0.9"), "dirac_cfl");
    }

    #[test]
    fn alpha_error_mentions_positivity() {
        let err = RunConfig::parse("epsilon=1\nsigma2=0.25\nalpha=-1").unwrap_err();
        assert!(err.to_string().contains("positive"));
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let c = RunConfig::parse("epsilon=0.1\nsigma2=3\nN=16\ndelta=0.25\nrecovery_tol=1e-13\nmode=picard").unwrap();
        let text = c.serialize();
        let again = RunConfig::parse(&text).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.serialize(), text);
        assert!(text.contains("recovery_tol=1e-13\n"));
    }

    #[test]
    fn help_lists_every_key() {
        let h = keys_help();
        for (k, _, _) in KEYS {
            assert!(h.contains(k));
        }
    }
}
