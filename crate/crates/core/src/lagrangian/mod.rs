//! Relativistic Lagrangian coordinates: labels, tracers and the inverse map.

pub mod flow;
pub mod inverse;
pub mod label;

pub use flow::{advance_flow, FlowState, GridVelocity, LinearVelocity, Tracer, VelocitySource};
pub use inverse::{invert_map, InverseMap};
pub use label::{advance_label, initial_label, verify_density_identity, LabelField};
