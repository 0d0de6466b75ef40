//! Exact computations for Ramsey properties of linear systems over the
//! integers, finite abelian groups and the primes.

pub mod error;
pub mod exact;
pub mod ground;
pub mod group;
pub mod matrix;
pub mod primes;
pub mod solutions;
pub mod hypergraph;
pub mod coloring;
pub mod montecarlo;
mod util;

pub use error::{Error, Result};
pub use exact::{ExactLogValue, LogRatio, PowerProduct};
pub use ground::{Elements, GroundKind, GroundSet};
pub use group::{FiniteAbelianGroup, GroupElement};
pub use matrix::IntegerMatrix;
