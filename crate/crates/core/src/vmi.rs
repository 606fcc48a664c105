//! Valuated matroid intersection and the reductions built on it: tuples
//! with an independence constraint on their common part, tuples with a
//! nonnegative penalty on their common part, an upper bound on the
//! intersection size, and laminar convex usage costs.

use crate::error::{invalid, Error, Result};
use crate::matroid::{make_uniform, MatroidOracle};
use crate::primitives::{box_points, ExtValue, IntVector, Rational, Subset, MAX_GROUND};
use crate::solution::{Status, TupleSolution};
use crate::valuated::{
    check_mnat_exchange, disjoint_sum, dual_valuation, intersection_constraint_valuation, laminar_convex_function,
    laminar_penalty, split_stacked, LaminarSpec, ValuationOracle,
};
use crate::viap::{solve_v_geq_k, IntersectionSolution};

/// Largest count-vector box that is checked exhaustively for M♮-convexity.
const PHI_CHECK_VOLUME: u128 = 10_000;

fn infeasible_pair(n: usize) -> IntersectionSolution {
    IntersectionSolution {
        x1: Subset::empty(n),
        x2: Subset::empty(n),
        value: ExtValue::Infinite,
        status: Status::Infeasible,
        witness: None,
        witness_is_dual: false,
        oracle_calls: 0,
        augmentations: 0,
    }
}

/// A common `X` minimizing `ω1(X) + ω2(X)`.
///
/// Different ranks make the sum `+inf` everywhere, reported as infeasible.
pub fn solve_vmi(omega1: &ValuationOracle, omega2: &ValuationOracle) -> Result<IntersectionSolution> {
    if omega1.ground_size() != omega2.ground_size() {
        return invalid("valuations over different ground sets");
    }
    if omega1.rank() != omega2.rank() {
        return Ok(infeasible_pair(omega1.ground_size()));
    }
    solve_v_geq_k(omega1, omega2, omega1.rank())
}

fn stacked_solve(omegas: &[ValuationOracle], constraint: Result<ValuationOracle>) -> Result<TupleSolution> {
    let constraint = match constraint {
        Ok(c) => c,
        Err(Error::EmptyDomain(_)) => return Ok(TupleSolution::infeasible()),
        Err(e) => return Err(e),
    };
    let n = omegas[0].ground_size();
    let stacked = disjoint_sum(omegas)?;
    let sol = solve_vmi(&stacked, &constraint)?;
    if !sol.is_optimal() {
        return Ok(TupleSolution::infeasible());
    }
    Ok(TupleSolution {
        sets: split_stacked(&sol.x1, omegas.len(), n),
        value: sol.value,
        status: Status::Optimal,
        witness: sol.witness,
    })
}

fn check_common_ground(omegas: &[ValuationOracle], n: usize) -> Result<()> {
    if omegas.is_empty() {
        return invalid("need at least one valuation");
    }
    if omegas.iter().any(|o| o.ground_size() != n) {
        return invalid("valuations over different ground sets");
    }
    if n * omegas.len() > MAX_GROUND {
        return invalid(format!("stacked ground set exceeds {MAX_GROUND} elements"));
    }
    Ok(())
}

/// `min Σ ω_i(X_i)` subject to `∩X_i` independent in `indep`.
pub fn solve_v_in(omegas: &[ValuationOracle], indep: &MatroidOracle) -> Result<TupleSolution> {
    check_common_ground(omegas, indep.ground_size())?;
    let r = omegas.iter().map(|o| o.rank()).sum();
    stacked_solve(omegas, intersection_constraint_valuation(omegas.len(), indep, r))
}

/// `min ω1(X1) + ω2(X2)` subject to `|X1 ∩ X2| ≤ k`.
pub fn solve_v_leq_k(omega1: &ValuationOracle, omega2: &ValuationOracle, k: usize) -> Result<IntersectionSolution> {
    let n = omega1.ground_size();
    let sol = solve_v_in(&[omega1.clone(), omega2.clone()], &make_uniform(n, k.min(n))?)?;
    Ok(tuple_to_pair(sol, n))
}

fn tuple_to_pair(sol: TupleSolution, n: usize) -> IntersectionSolution {
    if !sol.is_optimal() {
        return infeasible_pair(n);
    }
    IntersectionSolution {
        x1: sol.sets[0],
        x2: sol.sets[1],
        value: sol.value,
        status: Status::Optimal,
        witness: None,
        witness_is_dual: false,
        oracle_calls: 0,
        augmentations: 0,
    }
}

/// `(V≥k)` through the dual route: `(V≤ r1-k)` on `ω1` and the dual of `ω2`.
pub fn solve_v_geq_k_via_dual(
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
    k: usize,
) -> Result<IntersectionSolution> {
    let n = omega1.ground_size();
    let r1 = omega1.rank();
    if k > r1 {
        return Ok(infeasible_pair(n));
    }
    let mut sol = solve_v_leq_k(omega1, &dual_valuation(omega2), r1 - k)?;
    if sol.is_optimal() {
        sol.x2 = sol.x2.complement();
    }
    Ok(sol)
}

/// `min Σ ω_i(X_i) + w(∩X_i)` for `w ≥ 0`.
pub fn solve_v_n_w(omegas: &[ValuationOracle], w: &[Rational]) -> Result<TupleSolution> {
    check_common_ground(omegas, w.len())?;
    let r = omegas.iter().map(|o| o.rank()).sum();
    stacked_solve(omegas, laminar_penalty(w, omegas.len(), r))
}

/// `min Σ ω_i(X_i) + φ(x)` where `x(v)` counts the sets containing `v` and
/// `φ` is laminar convex on count vectors.
pub fn solve_sum_valuated_plus_laminar(omegas: &[ValuationOracle], phi: &LaminarSpec) -> Result<TupleSolution> {
    let n = phi.dimension();
    check_common_ground(omegas, n)?;
    let phi_fn = laminar_convex_function(phi)?;
    if phi_fn.box_volume() <= PHI_CHECK_VOLUME && !check_mnat_exchange(&phi_fn)? {
        return invalid("usage cost is not M-natural convex");
    }
    let copies = omegas.len();
    let r: usize = omegas.iter().map(|o| o.rank()).sum();
    let lower: Vec<i64> = phi.lower.iter().map(|&l| l.max(0)).collect();
    let upper: Vec<i64> = phi.upper.iter().map(|&u| u.min(copies as i64)).collect();
    let Some(counts) = box_points(&lower, &upper).find(|c| c.sum() == r as i64 && phi_fn.value(c).is_finite()) else {
        return Ok(TupleSolution::infeasible());
    };
    let mut blocks = vec![Subset::empty(n); copies];
    for (v, &c) in counts.0.iter().enumerate() {
        for b in blocks.iter_mut().take(c as usize) {
            b.insert(v);
        }
    }
    let witness = Subset::concat(&blocks);
    let lifted = ValuationOracle::from_fn(n * copies, r, witness, "lifted-usage-cost", move |x| {
        let counts = IntVector(
            (0..n)
                .map(|v| (0..copies).filter(|&i| x.contains(i * n + v)).count() as i64)
                .collect(),
        );
        phi_fn.value(&counts)
    })?;
    stacked_solve(omegas, Ok(lifted))
}
