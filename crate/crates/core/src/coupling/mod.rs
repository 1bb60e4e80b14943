//! The regularized coupled system: potential and force terms, the
//! monolithic co-evolution driver and the Picard iteration.

pub mod coevolve;
pub mod fields;
pub mod mollifier;
pub mod picard;

pub use coevolve::{lagrangian_grid_for, CoupledState, Coupler, Interaction, LABEL_COURANT};
pub use fields::{force_source, potential_field, shortwave_energy_on_eulerian, CouplingParams};
pub use mollifier::{build_mollifier, MollifierKernel, Tap};
pub use picard::{DivergenceReport, PicardOptions, PicardOutcome};
