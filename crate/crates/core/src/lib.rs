//! Variational solver and verification toolkit for edge domain walls in
//! exchange-biased ferromagnetic strips.

pub mod asymptotics;
pub mod bounds;
pub mod cutoff;
pub mod energy;
pub mod error;
pub mod grid;
pub mod limit;
pub mod minimize;
pub mod nonlocal;
pub mod quad;
pub mod strip2d;

pub use error::{Error, Result};
