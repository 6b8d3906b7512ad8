//! Canonical conic programs and an interior-point solver for them.

mod ipm;
mod problem;

pub use ipm::{ConicSolver, InteriorPointSolver, SolveStatus, SolverConfig, SolverOutput};
pub use problem::{BlockTerm, ConicProblem, LinearEquality, PsdBlock, VariableBounds};
