//! Sparse recovery by iterative hard thresholding, with the tools to check
//! its theory on concrete instances: stable points, RIP constants, tail
//! bounds, phase-transition bounds and Monte Carlo experiments.

pub mod asymptotics;
pub mod error;
pub mod experiments;
pub mod instance;
pub mod linalg;
pub mod sampling;
pub mod solvers;
pub mod stablepoint;
pub mod rip;
pub mod support;
pub mod transitions;

pub use error::{Error, Result};
pub use instance::ProblemInstance;
pub use linalg::{hard_threshold, objective, pseudo_inverse_apply, restrict, LeastSquares};
pub use sampling::{CoefficientModel, RngSpec};
pub use solvers::{SolverConfig, SolverTrace, Termination, Variant};
pub use support::SupportSet;

pub use nalgebra;
pub use nalgebra::{DMatrix, DVector};

/// Library version, embedded in experiment outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
