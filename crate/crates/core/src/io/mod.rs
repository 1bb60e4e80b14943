//! Configuration, run driver, audit and convergence reports, artifacts.

pub mod audit;
pub mod config;
pub mod convergence;
pub mod output;
pub mod run;

pub use audit::{audit, AuditCheck, AuditReport};
pub use config::{keys_help, Mode, RunConfig};
pub use convergence::{convergence, ConvergenceReport, ConvergenceRow};
pub use output::{
    diagnostics_csv, read_snapshot, sha256_hex, write_snapshot, ArtifactEntry, DiagnosticsRow,
    Manifest, SnapshotHeader, DIAGNOSTICS_HEADER,
};
pub use run::{run, PicardSummary, RunSummary, Simulation};
