//! Conic feasibility problems, their solvers and the conversion builders.
//!
//! Problems are stated over complex Hermitian blocks and nonnegative
//! scalars ([`ConicProblem`]), lowered to real symmetric blocks
//! ([`RealProblem`]) and handed to a [`ConicSolver`]. [`solve`] lifts the
//! solver's point back, re-substitutes it and classifies the outcome.

pub mod builders;
pub mod ipm;
mod lower;
pub mod model;
pub mod projection;
pub mod sample;
pub mod sdpa;
mod verdict;

pub use builders::{build_conversion, build_free_test, Conversion};
pub use ipm::InteriorPoint;
pub use lower::{RealBlockEntry, RealProblem, RealRow};
pub use model::{BlockId, BlockKind, BlockValue, ConicProblem, Equality, LinearMap, MapId, Term};
pub use projection::AlternatingProjection;
pub use sample::{sample_free, Alphabets, Dims};
pub use verdict::{classify, solve, ConicSolver, Diagnostics, FeasibilityVerdict, RealSolution, Status, DEFAULT_EPS_FEAS, INFEASIBLE_FACTOR};
