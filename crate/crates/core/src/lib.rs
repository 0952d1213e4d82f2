//! Sparse excitation-space tools for exciton and coupled-cluster problems
//! on local Hamiltonians, plus resource estimates for their quantum
//! counterparts.

pub mod error;
pub mod estimator;
pub mod exbasis;
pub mod bse;
pub mod cli;
pub mod elements;
pub mod lcc;
pub mod lightcone;
pub mod model;
pub mod operator;
pub mod solvers;

pub use error::{Error, Result};
