//! Exact solvers for valuated matroid intersection problems with an
//! intersection-size constraint, their reductions, and brute-force
//! references for checking them.

pub mod apps;
pub mod bruteforce;
pub mod error;
pub mod greedy;
pub mod matroid;
pub mod mflow;
pub mod primitives;
pub mod random;
pub mod reference;
pub mod solution;
pub mod valuated;
pub mod viap;
pub mod vmi;

pub use error::{Error, Result};
pub use primitives::{ExtValue, IntVector, Rational, Subset};
pub use solution::{Status, TupleSolution, VectorPairSolution};
