//! Augmenting-path solver for minimizing `ω1(X1) + ω2(X2)` subject to a
//! lower or exact bound on `|X1 ∩ X2|`, with potential-based optimality
//! certificates.
//!
//! Node layout of the auxiliary digraph: `v` is the first copy of element
//! `v`, `n + v` the second copy, then the source `2n` and the sink `2n + 1`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::greedy::{descend, is_local_minimum, minimize_valuated, shifted_value};
use crate::primitives::{k_subsets, ExtValue, Rational, Subset};
pub use crate::solution::{Status, Witness};
use crate::valuated::{binomial, dual_valuation, ValuationOracle, DEFAULT_CHECK_LIMIT};

#[derive(Clone, Debug)]
pub struct IntersectionSolution {
    pub x1: Subset,
    pub x2: Subset,
    /// `+inf` when infeasible.
    pub value: ExtValue,
    pub status: Status,
    /// Present when optimal.
    pub witness: Option<Witness>,
    /// The witness certifies `(x1, V \ x2)` for `ω1` and the dual of `ω2`
    /// at intersection size `rank(ω1) - k`.
    pub witness_is_dual: bool,
    /// Oracle `value` calls made during the run, memo hits included.
    pub oracle_calls: u64,
    pub augmentations: usize,
}

impl IntersectionSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArcClass {
    Identity,
    Matched,
    Exchange1,
    Exchange2,
    Source,
    Sink,
}

#[derive(Clone, Debug)]
pub struct AuxArc {
    pub from: usize,
    pub to: usize,
    pub class: ArcClass,
    pub length: Rational,
}

#[derive(Clone, Debug)]
pub struct AuxDigraph {
    pub ground: usize,
    pub arcs: Vec<AuxArc>,
    out: Vec<Vec<usize>>,
}

impl AuxDigraph {
    pub fn node_count(&self) -> usize {
        2 * self.ground + 2
    }

    pub fn source(&self) -> usize {
        2 * self.ground
    }

    pub fn sink(&self) -> usize {
        2 * self.ground + 1
    }

    pub fn count(&self, class: ArcClass) -> usize {
        self.arcs.iter().filter(|a| a.class == class).count()
    }

    pub fn arcs_of(&self, class: ArcClass) -> impl Iterator<Item = &AuxArc> {
        self.arcs.iter().filter(move |a| a.class == class)
    }

    fn push(&mut self, from: usize, to: usize, class: ArcClass, length: Rational) {
        self.out[from].push(self.arcs.len());
        self.arcs.push(AuxArc {
            from,
            to,
            class,
            length,
        });
    }
}

/// Builds the exchange digraph for `(X1, X2)` under potentials `p1, p2`.
///
/// Requires `X1 ∈ argmin(ω1 - p1)` and `X2 ∈ argmin(ω2 + p2)`; a negative
/// exchange length reveals a violation.
pub fn build_aux_digraph(
    x1: &Subset,
    x2: &Subset,
    p1: &[Rational],
    p2: &[Rational],
    matched: &Subset,
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
) -> Result<AuxDigraph> {
    let n = omega1.ground_size();
    let mut g = AuxDigraph {
        ground: n,
        arcs: Vec::new(),
        out: vec![Vec::new(); 2 * n + 2],
    };
    let zero = Rational::zero;
    for v in 0..n {
        g.push(v, n + v, ArcClass::Identity, zero());
    }
    for v in matched.iter() {
        g.push(n + v, v, ArcClass::Matched, zero());
    }
    let base1 = omega1
        .value(x1)
        .into_finite()
        .ok_or_else(|| Error::Internal("X1 left the domain".into()))?;
    let base2 = omega2
        .value(x2)
        .into_finite()
        .ok_or_else(|| Error::Internal("X2 left the domain".into()))?;
    for u in x1.iter() {
        for v in x1.complement().iter() {
            if let Some(val) = omega1.value(&x1.exchange(u, v)).into_finite() {
                let len = val - &base1 - &p1[v] + &p1[u];
                if len < zero() {
                    return Err(Error::Internal(format!(
                        "negative exchange length on copy 1 ({u} -> {v})"
                    )));
                }
                g.push(u, v, ArcClass::Exchange1, len);
            }
        }
    }
    for v in x2.complement().iter() {
        for u in x2.iter() {
            if let Some(val) = omega2.value(&x2.exchange(u, v)).into_finite() {
                let len = val - &base2 + &p2[v] - &p2[u];
                if len < zero() {
                    return Err(Error::Internal(format!(
                        "negative exchange length on copy 2 ({v} -> {u})"
                    )));
                }
                g.push(n + v, n + u, ArcClass::Exchange2, len);
            }
        }
    }
    let s = g.source();
    let t = g.sink();
    for v in x1.difference(x2).iter() {
        g.push(s, v, ArcClass::Source, zero());
    }
    for v in x2.difference(x1).iter() {
        g.push(n + v, t, ArcClass::Sink, zero());
    }
    Ok(g)
}

#[derive(Clone, Debug)]
pub struct ShortestPaths {
    /// `None` for unreachable nodes.
    pub dist: Vec<Option<Rational>>,
    /// Arc index into the digraph used to reach each node.
    pub parent: Vec<Option<usize>>,
    /// Node sequence from source to sink, if the sink is reachable.
    pub path: Option<Vec<usize>>,
}

/// Label-setting search keyed on `(length, hops)` lexicographically, so the
/// returned path has fewest arcs among shortest ones.
pub fn shortest_path_with_hop_tiebreak(g: &AuxDigraph) -> ShortestPaths {
    let nodes = g.node_count();
    let mut best: Vec<Option<(Rational, usize)>> = vec![None; nodes];
    let mut parent = vec![None; nodes];
    let mut done = vec![false; nodes];
    let mut heap = BinaryHeap::new();
    best[g.source()] = Some((Rational::zero(), 0));
    heap.push(Reverse((Rational::zero(), 0usize, g.source())));
    while let Some(Reverse((d, hops, x))) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        for &ai in &g.out[x] {
            let arc = &g.arcs[ai];
            let key = (&d + &arc.length, hops + 1);
            if done[arc.to] || best[arc.to].as_ref().is_some_and(|b| *b <= key) {
                continue;
            }
            best[arc.to] = Some(key.clone());
            parent[arc.to] = Some(ai);
            heap.push(Reverse((key.0, key.1, arc.to)));
        }
    }
    let path = best[g.sink()].as_ref().map(|_| {
        let mut nodes_rev = vec![g.sink()];
        let mut cur = g.sink();
        while let Some(ai) = parent[cur] {
            cur = g.arcs[ai].from;
            nodes_rev.push(cur);
        }
        nodes_rev.reverse();
        nodes_rev
    });
    ShortestPaths {
        dist: best.into_iter().map(|b| b.map(|(d, _)| d)).collect(),
        parent,
        path,
    }
}

/// Solver state between augmentations.
#[derive(Clone, Debug)]
pub struct AugmentState {
    pub x1: Subset,
    pub x2: Subset,
    pub p1: Vec<Rational>,
    pub p2: Vec<Rational>,
}

impl AugmentState {
    pub fn intersection(&self) -> Subset {
        self.x1.intersection(&self.x2)
    }

    pub fn witness(&self) -> Witness {
        Witness {
            p1: self.p1.clone(),
            p2: self.p2.clone(),
            matched: self.intersection(),
        }
    }
}

/// One augmentation. Returns `None` when the sink is unreachable.
pub fn augment_step(
    state: &AugmentState,
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
) -> Result<Option<AugmentState>> {
    let n = omega1.ground_size();
    let matched = state.intersection();
    let g = build_aux_digraph(&state.x1, &state.x2, &state.p1, &state.p2, &matched, omega1, omega2)?;
    let sp = shortest_path_with_hop_tiebreak(&g);
    let Some(path) = sp.path else { return Ok(None) };
    let dt = sp.dist[g.sink()].clone().expect("sink reached");
    let cap = |d: &Option<Rational>| match d {
        Some(d) if *d < dt => d.clone(),
        _ => dt.clone(),
    };
    let mut next = state.clone();
    for v in 0..n {
        next.p1[v] += cap(&sp.dist[v]);
        next.p2[v] += cap(&sp.dist[n + v]);
    }
    for pair in path.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a < n && b < n {
            next.x1 = next.x1.exchange(a, b);
        } else if (n..2 * n).contains(&a) && (n..2 * n).contains(&b) {
            // Arc (v, u) on copy 2 brings v in and takes u out.
            next.x2 = next.x2.exchange(b - n, a - n);
        }
    }
    check_step(state, &next, omega1, omega2)?;
    Ok(Some(next))
}

fn check_step(
    prev: &AugmentState,
    next: &AugmentState,
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
) -> Result<()> {
    if next.intersection().len() != prev.intersection().len() + 1 {
        return Err(Error::Internal(
            "augmentation did not grow the intersection by one".into(),
        ));
    }
    check_invariants(next)?;
    let neg: Vec<Rational> = next.p1.iter().map(|p| -p).collect();
    if !is_local_minimum(omega1, Some(&neg), &next.x1) || !is_local_minimum(omega2, Some(&next.p2), &next.x2) {
        return Err(Error::Internal(
            "augmented sets are not potential-shifted minimizers".into(),
        ));
    }
    Ok(())
}

/// Potential invariants maintained by the augmentation loop.
pub fn check_invariants(state: &AugmentState) -> Result<()> {
    if state.p1 != state.p2 {
        return Err(Error::Internal("potentials on the two copies diverged".into()));
    }
    let p = &state.p1;
    let Some(min) = p.iter().min() else { return Ok(()) };
    let max = p.iter().max().expect("nonempty");
    if !min.is_zero() {
        return Err(Error::Internal("minimum potential is not zero".into()));
    }
    if state.x1.difference(&state.x2).iter().any(|v| p[v] != *min) {
        return Err(Error::Internal("X1 \\ X2 left the potential argmin".into()));
    }
    if state.x2.difference(&state.x1).iter().any(|v| p[v] != *max) {
        return Err(Error::Internal("X2 \\ X1 left the potential argmax".into()));
    }
    Ok(())
}

fn run_geq(
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
    k: usize,
    stop_at: usize,
) -> Result<IntersectionSolution> {
    let n = omega1.ground_size();
    if omega2.ground_size() != n {
        return Err(Error::InvalidInput("valuations over different ground sets".into()));
    }
    let calls_before = omega1.query_count() + omega2.query_count();
    let (x1, _) = minimize_valuated(omega1)?;
    let (x2, _) = minimize_valuated(omega2)?;
    let mut state = AugmentState {
        x1,
        x2,
        p1: vec![Rational::zero(); n],
        p2: vec![Rational::zero(); n],
    };
    let mut augmentations = 0;
    let mut feasible = true;
    while state.intersection().len() < stop_at {
        match augment_step(&state, omega1, omega2)? {
            Some(next) => {
                state = next;
                augmentations += 1;
            }
            None => {
                feasible = false;
                break;
            }
        }
    }
    let value = omega1.value(&state.x1) + omega2.value(&state.x2);
    let witness = feasible.then(|| {
        let cap = state.intersection();
        let matched = if cap.len() > k {
            Subset::from_indices(n, cap.iter().take(k))
        } else {
            cap
        };
        Witness {
            matched,
            ..state.witness()
        }
    });
    let oracle_calls = omega1.query_count() + omega2.query_count() - calls_before;
    Ok(IntersectionSolution {
        x1: state.x1,
        x2: state.x2,
        value: if feasible { value } else { ExtValue::Infinite },
        status: if feasible { Status::Optimal } else { Status::Infeasible },
        witness,
        witness_is_dual: false,
        oracle_calls,
        augmentations,
    })
}

/// Minimizes `ω1(X1) + ω2(X2)` subject to `|X1 ∩ X2| ≥ k`.
pub fn solve_v_geq_k(omega1: &ValuationOracle, omega2: &ValuationOracle, k: usize) -> Result<IntersectionSolution> {
    run_geq(omega1, omega2, k, k)
}

/// Minimizes `ω1(X1) + ω2(X2)` subject to `|X1 ∩ X2| = k`.
///
/// When the unconstrained minimizers already share more than `k` elements
/// the problem is solved on `ω1` and the dual of `ω2` at size `r1 - k`.
pub fn solve_v_eq_k(omega1: &ValuationOracle, omega2: &ValuationOracle, k: usize) -> Result<IntersectionSolution> {
    let calls_before = omega1.query_count() + omega2.query_count();
    let (x1, _) = minimize_valuated(omega1)?;
    let (x2, _) = minimize_valuated(omega2)?;
    if x1.intersection(&x2).len() <= k {
        let mut sol = run_geq(omega1, omega2, k, k)?;
        sol.oracle_calls = omega1.query_count() + omega2.query_count() - calls_before;
        return Ok(sol);
    }
    let r1 = omega1.rank();
    let dual2 = dual_valuation(omega2);
    let target = r1 - k;
    let inner = run_geq(omega1, &dual2, target, target)?;
    let x2 = inner.x2.complement();
    let feasible = inner.is_optimal() && inner.x1.intersection(&x2).len() == k;
    let value = if feasible {
        omega1.value(&inner.x1) + omega2.value(&x2)
    } else {
        ExtValue::Infinite
    };
    Ok(IntersectionSolution {
        x1: inner.x1,
        x2,
        value,
        status: if feasible { Status::Optimal } else { Status::Infeasible },
        witness: inner.witness.filter(|_| feasible),
        witness_is_dual: true,
        oracle_calls: omega1.query_count() + omega2.query_count() - calls_before,
        augmentations: inner.augmentations,
    })
}

/// Checks that `(p1, p2, F)` certifies `(X1, X2)` for intersection size `k`.
///
/// Minimality of `X1` for `ω1 - p1` and of `X2` for `ω2 + p2` is checked
/// exhaustively when the domains are small and by single exchanges
/// otherwise (exact for valuated matroids).
pub fn verify_witness(
    x1: &Subset,
    x2: &Subset,
    witness: &Witness,
    k: usize,
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
) -> bool {
    let n = omega1.ground_size();
    let Witness { p1, p2, matched } = witness;
    if p1.len() != n || p2.len() != n || p1 != p2 {
        return false;
    }
    if matched.len() != k || !matched.is_subset(&x1.intersection(x2)) {
        return false;
    }
    let (Some(min1), Some(max2)) = (p1.iter().min(), p2.iter().max()) else {
        return k == 0 && omega1.in_domain(x1) && omega2.in_domain(x2);
    };
    if x1.difference(matched).iter().any(|v| p1[v] != *min1) || x2.difference(matched).iter().any(|v| p2[v] != *max2) {
        return false;
    }
    let neg: Vec<Rational> = p1.iter().map(|p| -p).collect();
    is_minimizer(omega1, &neg, x1) && is_minimizer(omega2, p2, x2)
}

fn is_minimizer(omega: &ValuationOracle, shift: &[Rational], x: &Subset) -> bool {
    let at = shifted_value(omega, Some(shift), x);
    if !at.is_finite() {
        return false;
    }
    if binomial(omega.ground_size(), omega.rank()) <= DEFAULT_CHECK_LIMIT as u128 {
        k_subsets(omega.ground_size(), omega.rank()).all(|y| shifted_value(omega, Some(shift), &y) >= at)
    } else {
        is_local_minimum(omega, Some(shift), x)
    }
}

/// Verifies a solution's certificate against the instance it solves.
pub fn verify_solution(
    sol: &IntersectionSolution,
    k: usize,
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
) -> bool {
    let Some(w) = &sol.witness else { return false };
    if sol.witness_is_dual {
        let dual2 = dual_valuation(omega2);
        let target = omega1.rank().wrapping_sub(k);
        target <= omega1.rank() && verify_witness(&sol.x1, &sol.x2.complement(), w, target, omega1, &dual2)
    } else {
        verify_witness(&sol.x1, &sol.x2, w, k, omega1, omega2)
    }
}

/// Steepest descent on `ω - p` from `start`; exposed for warm starts.
pub fn minimize_shifted(omega: &ValuationOracle, shift: &[Rational], start: Subset) -> Result<(Subset, ExtValue)> {
    descend(omega, Some(shift), start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::rat;
    use crate::valuated::{from_table, size_constrained_modular};

    fn set(n: usize, xs: &[usize]) -> Subset {
        Subset::from_indices(n, xs.iter().copied())
    }

    fn modular(w: &[i64], r: usize) -> ValuationOracle {
        size_constrained_modular(&w.iter().map(|&x| rat(x)).collect::<Vec<_>>(), r).unwrap()
    }

    #[test]
    fn digraph_examples() {
        let o = modular(&[1, 2, 4], 2);
        let ab = set(3, &[0, 1]);
        let zero = vec![rat(0); 3];
        let g = build_aux_digraph(&ab, &ab, &zero, &zero, &ab, &o, &o).unwrap();
        assert_eq!(g.count(ArcClass::Identity), 3);
        assert_eq!(g.count(ArcClass::Matched), 2);
        assert_eq!(g.count(ArcClass::Source) + g.count(ArcClass::Sink), 0);
        let mut a1: Vec<(usize, usize, Rational)> = g
            .arcs_of(ArcClass::Exchange1)
            .map(|a| (a.from, a.to, a.length.clone()))
            .collect();
        a1.sort();
        assert_eq!(a1, vec![(0, 2, rat(3)), (1, 2, rat(2))]);

        let empty = Subset::empty(3);
        let g = build_aux_digraph(&ab, &ab, &zero, &zero, &empty, &o, &o).unwrap();
        assert_eq!(g.count(ArcClass::Matched), 0);
    }

    #[test]
    fn unreachable_sink_has_no_path() {
        let o = modular(&[1, 2, 4], 2);
        let ab = set(3, &[0, 1]);
        let zero = vec![rat(0); 3];
        let g = build_aux_digraph(&ab, &ab, &zero, &zero, &ab, &o, &o).unwrap();
        assert!(shortest_path_with_hop_tiebreak(&g).path.is_none());
    }

    #[test]
    fn hop_tiebreak_prefers_short_route() {
        let n = 4;
        let mut g = AuxDigraph {
            ground: n,
            arcs: Vec::new(),
            out: vec![Vec::new(); 2 * n + 2],
        };
        let (s, t) = (g.source(), g.sink());
        g.push(s, 0, ArcClass::Source, rat(0));
        g.push(0, 1, ArcClass::Exchange1, rat(1));
        g.push(1, 2, ArcClass::Exchange1, rat(1));
        g.push(2, 3, ArcClass::Exchange1, rat(1));
        g.push(3, t, ArcClass::Sink, rat(0));
        g.push(0, 5, ArcClass::Exchange1, rat(3));
        g.push(5, t, ArcClass::Sink, rat(0));
        let sp = shortest_path_with_hop_tiebreak(&g);
        assert_eq!(sp.path.unwrap(), vec![s, 0, 5, t]);
        assert_eq!(sp.dist[t], Some(rat(3)));
    }

    #[test]
    fn geq_examples() {
        let o1 = modular(&[1, 2, 4], 2);
        let o2 = modular(&[4, 2, 1], 2);
        let s1 = solve_v_geq_k(&o1, &o2, 1).unwrap();
        assert_eq!(s1.value, ExtValue::int(6));
        assert_eq!((s1.x1, s1.x2), (set(3, &[0, 1]), set(3, &[1, 2])));
        let s2 = solve_v_geq_k(&o1, &o2, 2).unwrap();
        assert_eq!(s2.value, ExtValue::int(9));
        assert_eq!(s2.augmentations, 1);
        assert!(verify_solution(&s2, 2, &o1, &o2));

        let a = from_table(4, &[(set(4, &[0, 1]), rat(0))]).unwrap();
        let b = from_table(4, &[(set(4, &[2, 3]), rat(0))]).unwrap();
        assert_eq!(solve_v_geq_k(&a, &b, 1).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn eq_examples() {
        let o = modular(&[1, 2, 4], 2);
        let s = solve_v_eq_k(&o, &o, 1).unwrap();
        assert_eq!(s.value, ExtValue::int(8));
        assert!(s.witness_is_dual);
        assert!(verify_solution(&s, 1, &o, &o));
        assert_eq!(solve_v_eq_k(&o, &o, 0).unwrap().status, Status::Infeasible);
        assert_eq!(solve_v_eq_k(&o, &o, 2).unwrap().value, ExtValue::int(6));
    }

    #[test]
    fn witness_examples() {
        let o1 = modular(&[1, 2, 4], 2);
        let o2 = modular(&[1, 3, 2], 2);
        let (x1, x2) = (set(3, &[0, 1]), set(3, &[0, 2]));
        let w = Witness::zero(3, set(3, &[0]));
        assert!(verify_witness(&x1, &x2, &w, 1, &o1, &o2));
        let mut bad = w.clone();
        bad.p1[2] = rat(1);
        assert!(!verify_witness(&x1, &x2, &bad, 1, &o1, &o2));
    }
}
