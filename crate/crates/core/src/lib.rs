//! Reproducible first-order methods for smooth convex minimization and
//! convex-concave minimax problems under inexact oracles.

// Negated comparisons reject NaN parameters along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod figures;
pub mod harness;
pub mod linalg;
mod methods;
pub mod metrics;
pub mod min_solvers;
pub mod minimax_solvers;
pub mod oracles;
pub mod plot;
pub mod point;
pub mod problems;
pub mod rng;
pub mod run;
pub mod verify;

pub use error::{Error, Result};
pub use point::{JointPoint, Vector};
pub use problems::{Domain, InstanceDoc, InstanceSeedSpec, MinProblem, MinimaxProblem};
