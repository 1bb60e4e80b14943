//! Simulator for relativistic short-wave/long-wave interaction: a
//! special-relativistic Euler fluid coupled to a massless Thirring-Dirac
//! field that lives in the fluid's relativistic Lagrangian coordinates.

pub mod checks;
pub mod coupling;
pub mod dirac;
pub mod error;
pub mod grid;
pub mod hydro;
pub mod io;
pub mod lagrangian;
pub mod scenarios;
pub mod spectral;
pub mod wave;

pub use error::{Error, Result};
