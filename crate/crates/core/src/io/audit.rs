//! Invariant audit of a configuration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{Mode, RunConfig};
use super::convergence::{fluid_run, refined, wave_horizon, wave_run};
use super::run::Simulation;
use crate::checks::{
    flux_equivalence, interaction_hypotheses, linear_flow_jacobian_error, nonrelativistic_deviation,
    observed_orders, recovery_roundtrip,
};
use crate::dirac::AlphaSet;
use crate::error::Result;

#[derive(Clone, Debug, Serialize)]
pub struct AuditCheck {
    pub name: String,
    pub measured: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
}

impl AuditCheck {
    pub fn at_most(name: &str, measured: f64, upper: f64) -> Self {
        Self::band(name, measured, None, Some(upper))
    }

    pub fn at_least(name: &str, measured: f64, lower: f64) -> Self {
        Self::band(name, measured, Some(lower), None)
    }

    pub fn band(name: &str, measured: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let pass = measured.is_finite()
            && lower.is_none_or(|l| measured >= l)
            && upper.is_none_or(|u| measured <= u);
        Self {
            name: name.to_string(),
            measured,
            lower,
            upper,
            pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub config_sha256: String,
    pub checks: Vec<AuditCheck>,
    pub pass: bool,
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn get(&self, name: &str) -> Option<&AuditCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Sample sizes of the randomized checks.
const STATE_SAMPLES: usize = 2000;
const SPINOR_SAMPLES: usize = 1000;

/// Runs every invariant check on `config`; randomized checks draw from `config.seed`.
pub fn audit(config: &RunConfig) -> Result<AuditReport> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks = Vec::new();
    let alphas = AlphaSet::default();

    checks.push(AuditCheck::at_most("dirac_algebra", alphas.check().max_residual(), 1e-14));
    checks.push(AuditCheck::at_most(
        "interaction_hypotheses",
        interaction_hypotheses(&mut rng, &alphas, SPINOR_SAMPLES),
        1e-14,
    ));

    let flux = flux_equivalence(&mut rng, &[1.0, 0.1], STATE_SAMPLES, config.ptilde_form)?;
    checks.push(AuditCheck::at_most("momentum_flux", flux.momentum_flux, 1e-13));
    checks.push(AuditCheck::at_most("density_identity_d", flux.density, 1e-13));
    checks.push(AuditCheck::at_most("momentum_identity_s", flux.momentum, 1e-13));

    let (err, failures) = recovery_roundtrip(&mut rng, &[1.0, 0.1], STATE_SAMPLES);
    checks.push(AuditCheck::at_most("recovery_roundtrip", err, 1e-10));
    checks.push(AuditCheck::at_most("recovery_failures", failures as f64, 0.0));

    let dev = nonrelativistic_deviation(&mut rng, &[0.01, 0.005], 200)?;
    checks.push(AuditCheck::band("nonrelativistic_ratio", dev[0] / dev[1], Some(3.6), Some(4.4)));

    let horizon = wave_horizon(config);
    let coarse = wave_run(config, horizon)?;
    let fine = wave_run(&refined(config, 2), horizon)?;
    // RK4 drifts the charge by O(dt^5) per step; at roundoff there is no order to measure.
    if coarse.charge_drift <= 1e-12 {
        checks.push(AuditCheck::at_most("charge_drift", coarse.charge_drift, 1e-12));
    } else {
        checks.push(AuditCheck::at_least(
            "charge_drift_order",
            observed_orders(&[coarse.charge_drift, fine.charge_drift])[0],
            4.0,
        ));
    }
    checks.push(AuditCheck::at_least(
        "wave_oracle_order",
        observed_orders(&[coarse.residual, fine.residual])[0],
        2.0,
    ));

    let fc = fluid_run(config)?;
    let ff = fluid_run(&refined(config, 2))?;
    checks.push(AuditCheck::at_most("jacobian_identity", fc.density_residual, 5e-3));
    checks.push(AuditCheck::at_least(
        "jacobian_identity_order",
        observed_orders(&[fc.density_residual, ff.density_residual])[0],
        1.0,
    ));
    checks.push(AuditCheck::at_most("mass_drift", fc.mass_drift, 1e-12));

    let (mass, momentum) = coupled_drift(config)?;
    checks.push(AuditCheck::at_most("coupled_mass_drift", mass, 1e-12));
    checks.push(AuditCheck::at_most("coupled_momentum_drift", momentum, 1e-12));

    let e: Vec<f64> = [10, 20].iter().map(|&n| linear_flow_jacobian_error(n, 1.0)).collect();
    checks.push(AuditCheck::band(
        "linear_flow_order",
        observed_orders(&e)[0],
        Some(3.5),
        Some(4.5),
    ));

    let pass = checks.iter().all(|c| c.pass);
    Ok(AuditReport {
        config_sha256: super::output::sha256_hex(config.serialize().as_bytes()),
        checks,
        pass,
    })
}

/// Relative mass drift and momentum drift (scaled by the mass) of a coupled run.
fn coupled_drift(config: &RunConfig) -> Result<(f64, f64)> {
    let mut sim = Simulation::new(config)?;
    let m0 = sim.state.fluid.total_mass();
    let p0 = sim.state.fluid.total_momentum();
    for _ in 0..sim.steps {
        sim.step(Mode::Coevolve)?;
    }
    let m1 = sim.state.fluid.total_mass();
    let p1 = sim.state.fluid.total_momentum();
    let dp = (0..3).map(|a| (p1[a] - p0[a]).abs()).fold(0.0, f64::max);
    Ok(((m1 - m0).abs() / m0, dp / m0))
}
