//! Independent reference solvers used to cross-check the augmenting-path
//! solver: a primal-dual method for the modular exact-overlap problem that
//! augments along zero-length paths and raises potentials in between, and a
//! two-sided method for the valuated exact-overlap problem that walks
//! between minimizer pairs.

use std::collections::{HashSet, VecDeque};

use num_traits::{Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::greedy::{is_local_minimum, minimize_valuated, minimizer_family};
use crate::matroid::{dual_matroid, MatroidOracle};
use crate::primitives::{ExtValue, Rational, Subset};
use crate::solution::{Status, Witness};
use crate::valuated::{from_matroid_and_weights, ValuationOracle, DEFAULT_CHECK_LIMIT};
use crate::viap::{build_aux_digraph, solve_v_geq_k, ArcClass, IntersectionSolution};
use crate::vmi::solve_v_leq_k;

/// Weight-splitting certificate `(q1, q2, λ)` with `q1 ≥ 0`, `q2 ≤ 0`,
/// `λ ≥ 0` and `q1 = q2 + λ` elementwise.
#[derive(Clone, Debug, PartialEq)]
pub struct LptWitness {
    pub q1: Vec<Rational>,
    pub q2: Vec<Rational>,
    pub lambda: Rational,
}

/// Result of the primal-dual solver together with its native certificate.
#[derive(Clone, Debug)]
pub struct LptSolution {
    pub solution: IntersectionSolution,
    /// Certifies `(x1, x2)`, or `(x1, V \ x2)` against the dual second
    /// matroid with negated weights when `solution.witness_is_dual`.
    pub lpt_witness: Option<LptWitness>,
    pub raises: usize,
}

struct LptState {
    x1: Subset,
    x2: Subset,
    q1: Vec<Rational>,
    q2: Vec<Rational>,
    lambda: Rational,
}

fn weights_minus(w: &[Rational], q: &[Rational]) -> Vec<Rational> {
    w.iter().zip(q).map(|(a, b)| a - b).collect()
}

fn weights_plus(w: &[Rational], q: &[Rational]) -> Vec<Rational> {
    w.iter().zip(q).map(|(a, b)| a + b).collect()
}

/// Nodes reachable from the source by zero-length arcs, with BFS parents.
fn zero_reach(n: usize, arcs: &[(usize, usize, Rational)], source: usize) -> (Vec<bool>, Vec<Option<usize>>) {
    let mut out = vec![Vec::new(); 2 * n + 2];
    for (i, (a, _, len)) in arcs.iter().enumerate() {
        if len.is_zero() {
            out[*a].push(i);
        }
    }
    let mut seen = vec![false; 2 * n + 2];
    let mut parent = vec![None; 2 * n + 2];
    seen[source] = true;
    let mut queue = VecDeque::from([source]);
    while let Some(x) = queue.pop_front() {
        for &i in &out[x] {
            let y = arcs[i].1;
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some(i);
                queue.push_back(y);
            }
        }
    }
    (seen, parent)
}

/// Runs augment/raise rounds from minimizers `(x1, x2)` until the overlap
/// reaches `k` or no raise is possible.
fn lpt_core(
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
    x1: Subset,
    x2: Subset,
    k: usize,
) -> Result<(Option<LptState>, usize, usize)> {
    let n = omega1.ground_size();
    let zero = vec![Rational::zero(); n];
    let mut st = LptState {
        x1,
        x2,
        q1: zero.clone(),
        q2: zero,
        lambda: Rational::zero(),
    };
    let (mut raises, mut augmentations) = (0, 0);
    while st.x1.intersection(&st.x2).len() < k {
        let matched = st.x1.intersection(&st.x2);
        // With q1 = q2 + λ the copy-2 lengths only see differences of q2.
        let g = build_aux_digraph(&st.x1, &st.x2, &st.q1, &st.q2, &matched, omega1, omega2)?;
        let arcs: Vec<(usize, usize, Rational)> = g.arcs.iter().map(|a| (a.from, a.to, a.length.clone())).collect();
        let (reach, parent) = zero_reach(n, &arcs, g.source());
        if reach[g.sink()] {
            let mut cur = g.sink();
            let mut x1 = st.x1;
            let mut x2 = st.x2;
            while let Some(i) = parent[cur] {
                let a = &g.arcs[i];
                match a.class {
                    ArcClass::Exchange1 => x1 = x1.exchange(a.from, a.to),
                    ArcClass::Exchange2 => x2 = x2.exchange(a.to - n, a.from - n),
                    _ => {}
                }
                cur = a.from;
            }
            if x1.intersection(&x2).len() != matched.len() + 1 {
                return Err(Error::Internal(
                    "zero-length augmentation did not grow the overlap by one".into(),
                ));
            }
            st.x1 = x1;
            st.x2 = x2;
            augmentations += 1;
            continue;
        }
        let delta = g
            .arcs
            .iter()
            .filter(|a| matches!(a.class, ArcClass::Exchange1 | ArcClass::Exchange2) && reach[a.from] && !reach[a.to])
            .map(|a| &a.length)
            .min()
            .cloned();
        let Some(delta) = delta else {
            return Ok((None, raises, augmentations));
        };
        if !delta.is_positive() {
            return Err(Error::Internal("potential raise with nonpositive step".into()));
        }
        for v in 0..n {
            if !reach[v] {
                st.q1[v] += &delta;
            }
            if reach[n + v] {
                st.q2[v] -= &delta;
            }
        }
        st.lambda += &delta;
        raises += 1;
    }
    Ok((Some(st), raises, augmentations))
}

/// `min w1(X1) + w2(X2)` over bases with `|X1 ∩ X2| = k`, by the
/// primal-dual zero-path method. Returns the native certificate as well.
pub fn lpt_solve_w_eq_k_detailed(
    m1: &MatroidOracle,
    m2: &MatroidOracle,
    w1: &[Rational],
    w2: &[Rational],
    k: usize,
) -> Result<LptSolution> {
    let n = m1.ground_size();
    if m2.ground_size() != n {
        return invalid("matroids over different ground sets");
    }
    let omega1 = from_matroid_and_weights(m1, w1)?;
    let omega2 = from_matroid_and_weights(m2, w2)?;
    let (x1, _) = minimize_valuated(&omega1)?;
    let (x2, _) = minimize_valuated(&omega2)?;
    let dual = x1.intersection(&x2).len() > k;
    let (run, raises, augmentations) = if dual {
        if k > m1.rank() {
            return Ok(LptSolution {
                solution: infeasible(n, true),
                lpt_witness: None,
                raises: 0,
            });
        }
        let neg: Vec<Rational> = w2.iter().map(|x| -x).collect();
        let dual2 = from_matroid_and_weights(&dual_matroid(m2), &neg)?;
        lpt_core(&omega1, &dual2, x1, x2.complement(), m1.rank() - k)?
    } else {
        lpt_core(&omega1, &omega2, x1, x2, k)?
    };
    let Some(st) = run else {
        return Ok(LptSolution {
            solution: infeasible(n, dual),
            lpt_witness: None,
            raises,
        });
    };
    let x2 = if dual { st.x2.complement() } else { st.x2 };
    if st.x1.intersection(&x2).len() != k {
        return Ok(LptSolution {
            solution: infeasible(n, dual),
            lpt_witness: None,
            raises,
        });
    }
    let lpt = LptWitness {
        q1: st.q1,
        q2: st.q2,
        lambda: st.lambda,
    };
    let (p1, p2) = lpt_to_potentials(&lpt);
    let matched = if dual {
        st.x1.intersection(&st.x2)
    } else {
        st.x1.intersection(&x2)
    };
    let value = omega1.value(&st.x1) + omega2.value(&x2);
    let solution = IntersectionSolution {
        x1: st.x1,
        x2,
        value,
        status: Status::Optimal,
        witness: Some(Witness { p1, p2, matched }),
        witness_is_dual: dual,
        oracle_calls: 0,
        augmentations,
    };
    Ok(LptSolution {
        solution,
        lpt_witness: Some(lpt),
        raises,
    })
}

/// [`lpt_solve_w_eq_k_detailed`] without the native certificate.
pub fn lpt_solve_w_eq_k(
    m1: &MatroidOracle,
    m2: &MatroidOracle,
    w1: &[Rational],
    w2: &[Rational],
    k: usize,
) -> Result<IntersectionSolution> {
    lpt_solve_w_eq_k_detailed(m1, m2, w1, w2, k).map(|s| s.solution)
}

fn infeasible(n: usize, dual: bool) -> IntersectionSolution {
    IntersectionSolution {
        x1: Subset::empty(n),
        x2: Subset::empty(n),
        value: ExtValue::Infinite,
        status: Status::Infeasible,
        witness: None,
        witness_is_dual: dual,
        oracle_calls: 0,
        augmentations: 0,
    }
}

/// Checks the weight-splitting conditions for `(X1, X2)`: signs, the
/// elementwise link through `λ`, minimality of `X1` for `w1 - q1` and of
/// `X2` for `w2 + q2`, and zero splits on the two set differences.
#[allow(clippy::too_many_arguments)]
pub fn lpt_witness_check(
    x1: &Subset,
    x2: &Subset,
    witness: &LptWitness,
    m1: &MatroidOracle,
    m2: &MatroidOracle,
    w1: &[Rational],
    w2: &[Rational],
) -> bool {
    let n = m1.ground_size();
    let LptWitness { q1, q2, lambda } = witness;
    if q1.len() != n || q2.len() != n || w1.len() != n || w2.len() != n {
        return false;
    }
    if lambda.is_negative() || q1.iter().any(|q| q.is_negative()) || q2.iter().any(|q| q.is_positive()) {
        return false;
    }
    if (0..n).any(|v| q1[v] != &q2[v] + lambda) {
        return false;
    }
    if x1.difference(x2).iter().any(|v| !q1[v].is_zero()) || x2.difference(x1).iter().any(|v| !q2[v].is_zero()) {
        return false;
    }
    let (Ok(o1), Ok(o2)) = (
        from_matroid_and_weights(m1, &weights_minus(w1, q1)),
        from_matroid_and_weights(m2, &weights_plus(w2, q2)),
    ) else {
        return false;
    };
    is_local_minimum(&o1, None, x1) && is_local_minimum(&o2, None, x2)
}

/// Turns potentials `(p1, p2)` with `p1 = p2` and `min p1 = 0` into
/// `(q1, q2, λ) = (p1, p2 - max p2, max p2)`.
pub fn convert_witness(p1: &[Rational], p2: &[Rational]) -> Result<LptWitness> {
    if p1 != p2 {
        return invalid("potentials on the two copies differ");
    }
    let Some(min) = p1.iter().min() else {
        return Ok(LptWitness {
            q1: Vec::new(),
            q2: Vec::new(),
            lambda: Rational::zero(),
        });
    };
    if !min.is_zero() {
        return invalid("minimum potential must be zero");
    }
    let lambda = p2.iter().max().cloned().expect("nonempty");
    Ok(LptWitness {
        q1: p1.to_vec(),
        q2: p2.iter().map(|p| p - &lambda).collect(),
        lambda,
    })
}

/// Reverse of [`convert_witness`]: both potentials equal `q1`.
pub fn lpt_to_potentials(witness: &LptWitness) -> (Vec<Rational>, Vec<Rational>) {
    (witness.q1.clone(), witness.q1.clone())
}

/// Greedy exchange walk from `from` to `to` inside a base family, calling
/// `visit` on every intermediate set; stops early when `visit` is true.
fn walk_family(
    family: &HashSet<Subset>,
    from: Subset,
    to: Subset,
    mut visit: impl FnMut(&Subset) -> Result<bool>,
) -> Result<Option<Subset>> {
    let mut cur = from;
    if visit(&cur)? {
        return Ok(Some(cur));
    }
    while cur != to {
        let step = to
            .difference(&cur)
            .iter()
            .find_map(|v| {
                cur.difference(&to)
                    .iter()
                    .map(|u| cur.exchange(u, v))
                    .find(|y| family.contains(y))
            })
            .ok_or_else(|| Error::Internal("minimizer family lacks an exchange step".into()))?;
        cur = step;
        if visit(&cur)? {
            return Ok(Some(cur));
        }
    }
    Ok(None)
}

/// `min ω1(X1) + ω2(X2)` with `|X1 ∩ X2| = k` from the `≤ k` and `≥ k`
/// relaxations, walking between minimizer pairs when neither hits `k`.
pub fn alt_solve_v_eq_k(omega1: &ValuationOracle, omega2: &ValuationOracle, k: usize) -> Result<IntersectionSolution> {
    let n = omega1.ground_size();
    let calls_before = omega1.query_count() + omega2.query_count();
    let finish = |mut sol: IntersectionSolution| {
        sol.oracle_calls = omega1.query_count() + omega2.query_count() - calls_before;
        sol
    };
    let upper = solve_v_geq_k(omega1, omega2, k)?;
    if !upper.is_optimal() {
        return Ok(finish(infeasible(n, false)));
    }
    if upper.x1.intersection(&upper.x2).len() == k {
        return Ok(finish(upper));
    }
    let lower = solve_v_leq_k(omega1, omega2, k)?;
    if !lower.is_optimal() {
        return Ok(finish(infeasible(n, false)));
    }
    if lower.x1.intersection(&lower.x2).len() == k {
        return Ok(finish(lower));
    }
    // Both relaxations are slack, so both pairs are unconstrained minimizers.
    if upper.value != lower.value {
        return Err(Error::Internal(
            "slack relaxations disagree on the unconstrained minimum".into(),
        ));
    }
    let fam1: HashSet<Subset> = minimizer_family(omega1, DEFAULT_CHECK_LIMIT)?.into_iter().collect();
    let fam2: HashSet<Subset> = minimizer_family(omega2, DEFAULT_CHECK_LIMIT)?.into_iter().collect();
    let step_check = |prev: &mut Option<usize>, size: usize| -> Result<bool> {
        if let Some(p) = *prev {
            if p.abs_diff(size) > 1 {
                return Err(Error::Internal("overlap jumped by more than one along the walk".into()));
            }
        }
        *prev = Some(size);
        Ok(size == k)
    };
    let mut prev = None;
    let hit1 = walk_family(&fam1, upper.x1, lower.x1, |y| {
        step_check(&mut prev, y.intersection(&upper.x2).len())
    })?;
    let (x1, x2) = match hit1 {
        Some(y) => (y, upper.x2),
        None => {
            let hit2 = walk_family(&fam2, upper.x2, lower.x2, |y| {
                step_check(&mut prev, lower.x1.intersection(y).len())
            })?;
            let y =
                hit2.ok_or_else(|| Error::Internal("walk between minimizer pairs missed the target overlap".into()))?;
            (lower.x1, y)
        }
    };
    let value = omega1.value(&x1) + omega2.value(&x2);
    Ok(finish(IntersectionSolution {
        x1,
        x2,
        value,
        status: Status::Optimal,
        witness: None,
        witness_is_dual: false,
        oracle_calls: 0,
        augmentations: upper.augmentations,
    }))
}
