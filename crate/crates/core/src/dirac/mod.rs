//! Short waves: the massless Thirring-Dirac field.

pub mod algebra;
pub mod solver;

pub use algebra::{build_alpha_set, AlphaSet, ComplexMatrix4, CurrentTuple, Spinor};
pub use solver::{
    dirac_rhs, observable, total_charge, DiracSolver, FreePotential, Observable, ObservablePair,
    Potential, PotentialField, SpinorField, ThirringPotential,
};
