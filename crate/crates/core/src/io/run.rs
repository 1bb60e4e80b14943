//! Run orchestration for the four modes.

use std::fs;
use std::path::{Path, PathBuf};

use super::config::{Mode, RunConfig};
use super::output::{
    diagnostics_csv, sha256_hex, write_snapshot, ArtifactEntry, DiagnosticsRow, Manifest,
};
use crate::checks::wave_oracle_residual;
use crate::coupling::{lagrangian_grid_for, CoupledState, Coupler, PicardOptions};
use crate::dirac::{
    observable, total_charge, AlphaSet, DiracSolver, FreePotential, Observable, ThirringPotential,
};
use crate::error::{Error, Result};
use crate::grid::{Field, ScalarField};
use crate::lagrangian::{advance_label, verify_density_identity};
use crate::scenarios::{fluid_initial, spinor_initial};
use crate::wave::WavePropagator;

/// A configured coupled state with a fixed step.
pub struct Simulation {
    pub config: RunConfig,
    pub coupler: Coupler,
    pub state: CoupledState,
    pub initial: CoupledState,
    /// `|u|^2` propagated by the wave equation from the initial spinor.
    pub oracle: WavePropagator,
    /// `V` built from the initial fluid, used by the spinor-only mode.
    pub frozen_potential: Option<ScalarField>,
    pub dt: f64,
    pub steps: usize,
}

impl Simulation {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        let fluid = fluid_initial(&grid, config.model()?, &config.fluid)?;
        let lag = lagrangian_grid_for(&fluid)?;
        let spinor = spinor_initial(&lag, &config.spinor)?;
        let state = CoupledState::new(fluid, spinor)?;
        let mut coupler = Coupler::new(config.coupling()?, &grid)?;
        coupler.scheme.cfl = config.cfl;
        coupler.solver = DiracSolver::new(AlphaSet::default(), config.dirac_cfl)?;
        let q = coupler.solver.initial_observable(&state.spinor, Observable::Charge);
        let oracle = WavePropagator::new(&q.w, &q.wt)?;
        let frozen_potential = coupler.potential(&state.fluid, &state.labels)?;
        // Headroom for the label limit, which moves with the flow.
        let steps = (config.t_final / (0.9 * coupler.max_dt(&state))).ceil().max(1.0) as usize;
        let dt = config.t_final / steps as f64;
        Ok(Self {
            config: config.clone(),
            coupler,
            initial: state.clone(),
            state,
            oracle,
            frozen_potential,
            dt,
            steps,
        })
    }

    /// One step of `mode`; the Picard mode is not stepped.
    pub fn step(&mut self, mode: Mode) -> Result<()> {
        let dt = self.dt;
        let c = &self.coupler;
        let cs = &self.state;
        let next = match mode {
            Mode::Coevolve => c.coevolve_step(cs, dt)?,
            Mode::EulerOnly => {
                // The same substeps the coupled step takes with the force off.
                let half = c.scheme.step(&cs.fluid, None, 0.5 * dt)?;
                let u_mid = half.u_re();
                let labels = advance_label(&cs.labels, &u_mid, dt, c.label_courant)?;
                let fluid = c.scheme.step(&half, None, 0.5 * dt)?;
                CoupledState {
                    fluid,
                    spinor: cs.spinor.clone(),
                    labels,
                    time: cs.time + dt,
                }
            }
            Mode::DiracOnly => {
                let spinor = if c.params.lambda == 0.0 && self.frozen_potential.is_none() {
                    c.solver.step(&cs.spinor, &FreePotential, cs.time, dt)?
                } else {
                    let pot = ThirringPotential {
                        alphas: &c.solver.alphas,
                        lambda: c.params.lambda,
                        v: self.frozen_potential.as_ref(),
                    };
                    c.solver.step(&cs.spinor, &pot, cs.time, dt)?
                };
                CoupledState {
                    spinor,
                    time: cs.time + dt,
                    ..cs.clone()
                }
            }
            Mode::Picard => {
                return Err(Error::Invalid("the Picard mode solves the whole horizon at once".into()))
            }
        };
        self.state = next;
        Ok(())
    }

    pub fn diagnostics(&self, state: &CoupledState, mode: Mode, picard: Option<f64>) -> Result<DiagnosticsRow> {
        let fluid_part = mode != Mode::DiracOnly;
        let spinor_part = mode != Mode::EulerOnly;
        let (mass, momentum) = (state.fluid.total_mass(), state.fluid.total_momentum());
        Ok(DiagnosticsRow {
            time: state.time,
            mass,
            momentum,
            charge: spinor_part.then(|| total_charge(&state.spinor)),
            density_residual: if fluid_part {
                Some(verify_density_identity(&state.labels, &state.fluid.rho_re())?)
            } else {
                None
            },
            wave_residual: if spinor_part {
                Some(wave_oracle_residual(
                    &state.spinor,
                    &self.oracle,
                    state.time,
                    &self.coupler.solver.alphas,
                    Observable::Charge,
                )?)
            } else {
                None
            },
            picard_distance: picard,
        })
    }
}

#[derive(Clone, Debug)]
pub struct PicardSummary {
    pub distances: Vec<f64>,
    pub converged: bool,
    pub diverged: bool,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub rows: Vec<DiagnosticsRow>,
    pub artifacts: Vec<PathBuf>,
    pub picard: Option<PicardSummary>,
}

fn snapshot(dir: &Path, index: usize, state: &CoupledState, mode: Mode) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if mode != Mode::DiracOnly {
        let f = &state.fluid;
        let rho = f.rho_re();
        let u = f.u_re();
        let comps: Vec<ScalarField> = (0..3).map(|a| Field::component(&u, a)).collect();
        let (h, b) = write_snapshot(
            dir,
            &format!("fluid_{index:05}"),
            f.grid(),
            state.time,
            &[("rho_re", &rho), ("u_re_x", &comps[0]), ("u_re_y", &comps[1]), ("u_re_z", &comps[2])],
        )?;
        out.extend([h, b]);
    }
    if mode != Mode::EulerOnly {
        let alphas = AlphaSet::default();
        let q = observable(&state.spinor, &alphas, Observable::Charge);
        let x = observable(&state.spinor, &alphas, Observable::Pseudocharge);
        let (h, b) = write_snapshot(
            dir,
            &format!("spinor_{index:05}"),
            &state.spinor.grid,
            state.time,
            &[("charge", &q), ("pseudocharge", &x)],
        )?;
        out.extend([h, b]);
    }
    Ok(out)
}

/// Runs `config` and writes diagnostics, snapshots and the manifest into `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunSummary> {
    fs::create_dir_all(out)?;
    let mut sim = Simulation::new(config)?;
    let mode = config.mode;
    let mut rows = Vec::new();
    let mut artifacts = Vec::new();
    let mut picard = None;
    if mode == Mode::Picard {
        let mut opts = PicardOptions::new(config.t_final);
        opts.tol = config.picard_tol;
        opts.max_iter = config.picard_max_iter;
        let outcome = sim.coupler.picard_solve(&sim.initial, &opts)?;
        let last = outcome.distances.last().copied();
        let states = outcome.states();
        let n = states.len() - 1;
        let with_spinor = outcome.spinors.is_some();
        for (k, st) in states.iter().enumerate() {
            if k % config.output_every == 0 || k == n {
                let row_mode = if with_spinor { mode } else { Mode::EulerOnly };
                rows.push(sim.diagnostics(st, row_mode, last)?);
                if config.snapshots {
                    artifacts.extend(snapshot(out, k, st, row_mode)?);
                }
            }
        }
        let mut csv = String::from("iteration,distance\n");
        for (i, d) in outcome.distances.iter().enumerate() {
            csv.push_str(&format!("{},{d:e}\n", i + 1));
        }
        let p = out.join("picard.csv");
        fs::write(&p, csv)?;
        artifacts.push(p);
        picard = Some(PicardSummary {
            distances: outcome.distances.clone(),
            converged: outcome.converged,
            diverged: outcome.divergence.is_some(),
        });
    } else {
        for k in 0..=sim.steps {
            if k > 0 {
                sim.step(mode)?;
            }
            if k % config.output_every == 0 || k == sim.steps {
                rows.push(sim.diagnostics(&sim.state, mode, None)?);
                if config.snapshots {
                    artifacts.extend(snapshot(out, k, &sim.state, mode)?);
                }
            }
        }
    }
    let diag = out.join("diagnostics.csv");
    fs::write(&diag, diagnostics_csv(&rows))?;
    artifacts.push(diag);

    let config_text = config.serialize();
    let mut entries = Vec::new();
    for p in &artifacts {
        entries.push(ArtifactEntry {
            path: p
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: sha256_hex(&fs::read(p)?),
        });
    }
    let manifest = Manifest {
        program: "relsw",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: sha256_hex(config_text.as_bytes()),
        seed: config.seed,
        mode: mode.name().to_string(),
        config: config_text,
        artifacts: entries,
    };
    artifacts.push(manifest.write(out)?);
    Ok(RunSummary {
        rows,
        artifacts,
        picard,
    })
}
