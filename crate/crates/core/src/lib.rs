//! Sparse sensor selection for linear arrays.
//!
//! Picks `M` of `N` candidate sensors so that the worst-case Cramér-Rao bound
//! for two uncorrelated, equal-power targets is as small as possible. The
//! selection problem is relaxed into a semidefinite program over the
//! selection weights, solved with an interior-point method, and turned back
//! into a binary selection by seeded randomized rounding.
//!
//! Module map:
//!
//! - [`array`]: candidate geometries, selections, Δω grids and the linear
//!   CRB building blocks.
//! - [`crb`]: two-target, single-target and worst-case bounds, plus an
//!   independent projection-matrix evaluation used as an oracle.
//! - [`conic`]: a canonical conic problem description and a dense
//!   primal-dual interior-point solver for LP + PSD cones.
//! - [`relaxation`]: builds and solves the convex relaxation.
//! - [`rounding`]: randomized rounding and the top-M fallback.
//! - [`baselines`]: edge, random and exhaustive reference selections.
//! - [`harness`]: end-to-end pipelines, file schemas and sweeps.

// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod baselines;
pub mod conic;
pub mod crb;
mod error;
pub mod harness;
pub mod relaxation;
pub mod rounding;

pub use array::{ArrayGeometry, CrbComponents, DeltaGrid, RelaxedSelection, Selection};
pub use crb::{CrbParams, ExtendedReal, WorstCase};
pub use error::{Error, Result};
