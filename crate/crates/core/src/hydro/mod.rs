//! Long waves: special-relativistic Euler equations in conservative form.

pub mod eos;
pub mod scheme;
pub mod variables;

pub use eos::{Eos, PressureLaw};
pub use scheme::{fv_step, FluidField, FvScheme, Reconstruction};
pub use variables::{
    Conserved, PressureLossForm, Primitive, RecoveryOptions, RelEuler, RelState,
};
