//! Sparse generalized eigenvalue problems via truncated Rayleigh flow.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: symmetric matrices, pencils, Cholesky, Jacobi and generalized eigensolvers.
//! - [`solver`]: the truncated Rayleigh flow iteration, step-size rule and warm starts.
//! - [`oracle`]: exhaustive small-scale solvers and perturbation diagnostics.
//! - [`models`]: sparse FDA, CCA and SIR reductions to a pencil, plus evaluation metrics.
//! - [`sim`]: seeded simulation scenarios and planted instances.
//! - [`harness`]: CSV/JSON I/O, cross-validation and the experiment runner.

pub mod error;
pub mod harness;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod rng;
pub mod sim;
pub mod solver;

pub use error::{Result, RifleError};
pub use linalg::{IndexSet, MatrixPair, SymMatrix};
pub use solver::{
    rifle, rifle_warm_start, Init, RifleConfig, RifleResult, StepSize, WarmStartResult,
    WarmStartSchedule,
};
