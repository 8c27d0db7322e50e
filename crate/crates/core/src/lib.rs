//! Para-Markov chains and counting processes: simulation, exact laws and
//! residual checks of their non-local evolution equations.

pub mod error;
pub(crate) mod quadrature;

pub mod specfun;
pub mod sampling;
pub mod stats;
pub mod processes;
pub mod operators;
pub mod stablelaw;
pub mod limits;
pub mod acceptance;
pub mod cli;

pub use error::{Error, Result};
