//! Result types shared by the fast solvers and the brute-force oracles.

use num_traits::Zero;

use crate::primitives::{ExtValue, IntVector, Rational, Subset};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    Infeasible,
}

/// Optimality certificate: potentials on both copies and a matched set.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub p1: Vec<Rational>,
    pub p2: Vec<Rational>,
    pub matched: Subset,
}

impl Witness {
    pub fn zero(n: usize, matched: Subset) -> Self {
        Witness {
            p1: vec![Rational::zero(); n],
            p2: vec![Rational::zero(); n],
            matched,
        }
    }
}

/// An optimal tuple `(X_1, …, X_n)` or an infeasibility verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct TupleSolution {
    pub sets: Vec<Subset>,
    /// `+inf` when infeasible.
    pub value: ExtValue,
    pub status: Status,
    /// Certificate for the stacked intersection instance the tuple came
    /// from, when a reduction produced it.
    pub witness: Option<Witness>,
}

impl TupleSolution {
    pub fn infeasible() -> Self {
        TupleSolution {
            sets: Vec::new(),
            value: ExtValue::Infinite,
            status: Status::Infeasible,
            witness: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// An optimal pair of integer vectors or an infeasibility verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPairSolution {
    pub x1: IntVector,
    pub x2: IntVector,
    pub value: ExtValue,
    pub status: Status,
}

impl VectorPairSolution {
    pub fn infeasible(n: usize) -> Self {
        VectorPairSolution {
            x1: IntVector::zeros(n),
            x2: IntVector::zeros(n),
            value: ExtValue::Infinite,
            status: Status::Infeasible,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}
