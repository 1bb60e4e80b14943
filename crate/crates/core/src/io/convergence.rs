//! Refinement studies on a configuration.

use serde::Serialize;

use super::config::{Mode, RunConfig};
use super::run::Simulation;
use crate::checks::{linear_flow_jacobian_error, observed_orders, wave_oracle_residual};
use crate::dirac::{total_charge, Observable};
use crate::error::{Error, Result};
use crate::lagrangian::verify_density_identity;

/// Largest node count a convergence study may reach on its finest level.
pub const MAX_STUDY_NODES: usize = 1 << 22;
pub const MAX_LEVELS: usize = 6;

/// Copy of `config` with every active axis refined by `factor`.
pub fn refined(config: &RunConfig, factor: usize) -> RunConfig {
    let mut c = config.clone();
    c.n = config.n.map(|n| if n > 1 { n * factor } else { 1 });
    c
}

/// Outcome of a spinor-only run against the wave oracle.
#[derive(Clone, Copy, Debug)]
pub struct WaveRun {
    /// Worse of the charge and pseudocharge relative L2 residuals.
    pub residual: f64,
    /// `|Q(T) - Q(0)| / Q(0)`.
    pub charge_drift: f64,
}

/// Spinor-only run of `config` to `horizon` with the fluid frozen.
pub fn wave_run(config: &RunConfig, horizon: f64) -> Result<WaveRun> {
    let mut c = config.clone();
    c.mode = Mode::DiracOnly;
    c.t_final = horizon;
    let mut sim = Simulation::new(&c)?;
    let q0 = total_charge(&sim.state.spinor);
    for _ in 0..sim.steps {
        sim.step(Mode::DiracOnly)?;
    }
    let st = &sim.state;
    let alphas = &sim.coupler.solver.alphas;
    let rho = wave_oracle_residual(&st.spinor, &sim.oracle, st.time, alphas, Observable::Charge)?;
    let chi_oracle = {
        let p = sim.coupler.solver.initial_observable(&sim.initial.spinor, Observable::Pseudocharge);
        crate::wave::WavePropagator::new(&p.w, &p.wt)?
    };
    let chi = wave_oracle_residual(&st.spinor, &chi_oracle, st.time, alphas, Observable::Pseudocharge)?;
    Ok(WaveRun {
        residual: rho.max(chi),
        charge_drift: (total_charge(&st.spinor) - q0).abs() / q0,
    })
}

/// Outcome of a fluid-only run with co-evolved labels.
#[derive(Clone, Copy, Debug)]
pub struct FluidRun {
    /// Relative L2 residual of `det(dy/dx) - rho_re` at the final time.
    pub density_residual: f64,
    /// `|M(T) - M(0)| / M(0)`.
    pub mass_drift: f64,
}

pub fn fluid_run(config: &RunConfig) -> Result<FluidRun> {
    let mut c = config.clone();
    c.mode = Mode::EulerOnly;
    let mut sim = Simulation::new(&c)?;
    let m0 = sim.state.fluid.total_mass();
    for _ in 0..sim.steps {
        sim.step(Mode::EulerOnly)?;
    }
    let st = &sim.state;
    Ok(FluidRun {
        density_residual: verify_density_identity(&st.labels, &st.fluid.rho_re())?,
        mass_drift: (st.fluid.total_mass() - m0).abs() / m0,
    })
}

/// Horizon used for the wave-oracle comparison: half the box along `x3`.
pub fn wave_horizon(config: &RunConfig) -> f64 {
    0.5 * config.length
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub level: usize,
    pub n: [usize; 3],
    pub wave_error: f64,
    pub density_error: f64,
    /// Linear-flow `J_Phi` error with `10 * 2^level` RK4 steps.
    pub flow_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderBand {
    pub name: &'static str,
    pub orders: Vec<f64>,
    pub lower: f64,
    pub upper: Option<f64>,
    pub pass: bool,
}

impl OrderBand {
    fn new(name: &'static str, orders: Vec<f64>, lower: f64, upper: Option<f64>) -> Self {
        let pass = orders
            .iter()
            .all(|&o| o >= lower && upper.is_none_or(|u| o <= u));
        Self { name, orders, lower, upper, pass }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub bands: Vec<OrderBand>,
}

impl ConvergenceReport {
    pub fn pass(&self) -> bool {
        self.bands.iter().all(|b| b.pass)
    }

    pub fn table(&self) -> String {
        let mut s = String::from("level,n1,n2,n3,wave_error,density_error,flow_error\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{:e},{:e},{:e}\n",
                r.level, r.n[0], r.n[1], r.n[2], r.wave_error, r.density_error, r.flow_error
            ));
        }
        for b in &self.bands {
            let orders: Vec<String> = b.orders.iter().map(|o| format!("{o:.3}")).collect();
            s.push_str(&format!(
                "# {} orders [{}] band [{}, {}] {}\n",
                b.name,
                orders.join(", "),
                b.lower,
                b.upper.map_or("inf".into(), |u| u.to_string()),
                if b.pass { "PASS" } else { "FAIL" }
            ));
        }
        s
    }
}

/// Errors of the wave oracle, the density identity and the linear-flow
/// Jacobian over `levels` successive halvings of the spacing.
pub fn convergence(config: &RunConfig, levels: usize) -> Result<ConvergenceReport> {
    if !(2..=MAX_LEVELS).contains(&levels) {
        return Err(Error::config("levels", format!("must lie in 2..={MAX_LEVELS}")));
    }
    config.validate()?;
    let finest = refined(config, 1 << (levels - 1));
    let nodes: usize = finest.n.iter().product();
    if nodes > MAX_STUDY_NODES {
        return Err(Error::config(
            "levels",
            format!("finest level has {nodes} nodes, above the limit of {MAX_STUDY_NODES}"),
        ));
    }
    let horizon = wave_horizon(config);
    let mut rows = Vec::with_capacity(levels);
    for level in 0..levels {
        let c = refined(config, 1 << level);
        rows.push(ConvergenceRow {
            level,
            n: c.n,
            wave_error: wave_run(&c, horizon)?.residual,
            density_error: fluid_run(&c)?.density_residual,
            flow_error: linear_flow_jacobian_error(10 << level, 1.0),
        });
    }
    let col = |f: fn(&ConvergenceRow) -> f64| observed_orders(&rows.iter().map(f).collect::<Vec<_>>());
    let bands = vec![
        OrderBand::new("wave_oracle", col(|r| r.wave_error), 2.0, None),
        OrderBand::new("jacobian_identity", col(|r| r.density_error), 1.0, None),
        OrderBand::new("linear_flow_jacobian", col(|r| r.flow_error), 3.5, Some(4.5)),
    ];
    Ok(ConvergenceReport { rows, bands })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_guards() {
        let c = RunConfig::example();
        assert!(matches!(convergence(&c, 1), Err(Error::Config { ref key, .. }) if key == "levels"));
        assert!(convergence(&c, 7).is_err());
        let mut big = c.clone();
        big.n = [64, 64, 64];
        assert!(matches!(convergence(&big, 3), Err(Error::Config { ref key, .. }) if key == "levels"));
    }

    #[test]
    fn refinement_keeps_slab_axes() {
        let c = RunConfig::example();
        assert_eq!(refined(&c, 4).n, [1, 1, 256]);
    }
}
