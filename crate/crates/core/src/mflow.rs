//! Integer M♮-convex submodular flow by cycle canceling, and the reduction
//! of the bounded-overlap problem for two M-convex functions with a
//! nonpositive overlap weight.
//!
//! The canceling loop works on residual arcs of the network plus exchange
//! arcs `u -> v` of length `h(∂ξ + χ_u - χ_v) - h(∂ξ)`. Each round pushes one
//! unit around a minimum-mean cycle with the fewest arcs and checks that
//! the exact objective strictly drops.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::primitives::{ExtValue, IntVector, Rational};
use crate::solution::{Status, VectorPairSolution};
use crate::valuated::{MnatFunction, BOX_SCAN_LIMIT};

#[derive(Clone, Debug, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    /// `None` is `-inf`.
    pub lower: Option<i64>,
    /// `None` is `+inf`.
    pub upper: Option<i64>,
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowNetwork {
    pub nodes: usize,
    pub arcs: Vec<FlowArc>,
}

impl FlowNetwork {
    pub fn new(nodes: usize, arcs: Vec<FlowArc>) -> Result<Self> {
        for a in &arcs {
            if a.from >= nodes || a.to >= nodes {
                return invalid("arc endpoint outside the node set");
            }
            if let (Some(l), Some(u)) = (a.lower, a.upper) {
                if l > u {
                    return invalid("arc lower capacity exceeds upper capacity");
                }
            }
        }
        Ok(FlowNetwork { nodes, arcs })
    }

    pub fn within_capacity(&self, flow: &[i64]) -> bool {
        flow.len() == self.arcs.len()
            && self
                .arcs
                .iter()
                .zip(flow)
                .all(|(a, &x)| a.lower.is_none_or(|l| l <= x) && a.upper.is_none_or(|u| x <= u))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSolution {
    pub flow: Vec<i64>,
    pub boundary: IntVector,
    pub objective: ExtValue,
}

/// Inflow minus outflow at every node.
pub fn boundary(flow: &[i64], network: &FlowNetwork) -> IntVector {
    let mut b = vec![0i64; network.nodes];
    for (a, &x) in network.arcs.iter().zip(flow) {
        b[a.to] += x;
        b[a.from] -= x;
    }
    IntVector(b)
}

/// `h(∂ξ) + Σ ŵ(a) ξ(a)`.
pub fn flow_objective(h: &MnatFunction, network: &FlowNetwork, flow: &[i64]) -> ExtValue {
    let linear: Rational = network
        .arcs
        .iter()
        .zip(flow)
        .map(|(a, &x)| &a.weight * Rational::from_integer(x.into()))
        .sum();
    h.value(&boundary(flow, network)).add_rational(&linear)
}

pub fn evaluate_flow(h: &MnatFunction, network: &FlowNetwork, flow: Vec<i64>) -> FlowSolution {
    FlowSolution {
        boundary: boundary(&flow, network),
        objective: flow_objective(h, network, &flow),
        flow,
    }
}

#[derive(Clone, Debug)]
enum Move {
    /// Push along network arc `i`, forward or backward.
    Flow(usize, bool),
    Exchange,
}

#[derive(Clone, Debug)]
struct Edge {
    from: usize,
    to: usize,
    length: Rational,
    kind: Move,
}

fn residual_edges(h: &MnatFunction, network: &FlowNetwork, flow: &[i64]) -> Vec<Edge> {
    let mut edges = Vec::new();
    for (i, (a, &x)) in network.arcs.iter().zip(flow).enumerate() {
        if a.upper.is_none_or(|u| x < u) {
            edges.push(Edge {
                from: a.from,
                to: a.to,
                length: a.weight.clone(),
                kind: Move::Flow(i, true),
            });
        }
        if a.lower.is_none_or(|l| x > l) {
            edges.push(Edge {
                from: a.to,
                to: a.from,
                length: -a.weight.clone(),
                kind: Move::Flow(i, false),
            });
        }
    }
    let b = boundary(flow, network);
    let base = h.value(&b).into_finite().expect("current boundary is in the domain");
    for u in 0..network.nodes {
        for v in 0..network.nodes {
            if u == v {
                continue;
            }
            if let Some(val) = h.value(&b.moved(v, u)).into_finite() {
                edges.push(Edge {
                    from: u,
                    to: v,
                    length: val - &base,
                    kind: Move::Exchange,
                });
            }
        }
    }
    edges
}

/// Minimum cycle mean by Karp's recurrence; `None` if the graph is acyclic.
fn min_cycle_mean(nodes: usize, edges: &[Edge]) -> Option<Rational> {
    let mut d: Vec<Vec<Option<Rational>>> = vec![vec![Some(Rational::zero()); nodes]];
    for k in 1..=nodes {
        let mut row: Vec<Option<Rational>> = vec![None; nodes];
        for e in edges {
            if let Some(prev) = &d[k - 1][e.from] {
                let cand = prev + &e.length;
                if row[e.to].as_ref().is_none_or(|c| cand < *c) {
                    row[e.to] = Some(cand);
                }
            }
        }
        d.push(row);
    }
    let mut best: Option<Rational> = None;
    for (v, dn) in d[nodes].iter().enumerate() {
        let Some(dn) = dn else { continue };
        let worst = (0..nodes)
            .filter_map(|k| {
                d[k][v]
                    .as_ref()
                    .map(|dk| (dn - dk) / Rational::from_integer(((nodes - k) as i64).into()))
            })
            .max();
        if let Some(w) = worst {
            if best.as_ref().is_none_or(|b| w < *b) {
                best = Some(w);
            }
        }
    }
    best
}

/// A cycle of minimum mean with the fewest arcs, as edge indices.
fn best_cycle(nodes: usize, edges: &[Edge], mean: &Rational) -> Option<Vec<usize>> {
    // Potentials for the shifted lengths, which have no negative cycle.
    let shifted: Vec<Rational> = edges.iter().map(|e| &e.length - mean).collect();
    let mut pi = vec![Rational::zero(); nodes];
    for _ in 0..nodes {
        let mut changed = false;
        for (e, len) in edges.iter().zip(&shifted) {
            let cand = &pi[e.from] + len;
            if cand < pi[e.to] {
                pi[e.to] = cand;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // Every arc on a minimum-mean cycle is tight; prefer flow arcs among parallels.
    let mut tight: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&i| matches!(edges[i].kind, Move::Exchange));
    for i in order {
        let e = &edges[i];
        if &pi[e.from] + &shifted[i] == pi[e.to] {
            tight[e.from].push(i);
        }
    }
    let mut best: Option<Vec<usize>> = None;
    for start in 0..nodes {
        let mut via: Vec<Option<usize>> = vec![None; nodes];
        let mut seen = vec![false; nodes];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut closing = None;
        'bfs: while let Some(x) = queue.pop_front() {
            for &ei in &tight[x] {
                let y = edges[ei].to;
                if y == start {
                    closing = Some(ei);
                    break 'bfs;
                }
                if !seen[y] {
                    seen[y] = true;
                    via[y] = Some(ei);
                    queue.push_back(y);
                }
            }
        }
        let Some(last) = closing else { continue };
        let mut cycle = vec![last];
        let mut cur = edges[last].from;
        while cur != start {
            let ei = via[cur].expect("bfs tree edge");
            cycle.push(ei);
            cur = edges[ei].from;
        }
        cycle.reverse();
        if best.as_ref().is_none_or(|b| cycle.len() < b.len()) {
            best = Some(cycle);
        }
    }
    best
}

/// Minimizes `h(∂ξ) + Σ ŵ ξ` over integer flows within capacities,
/// starting from the feasible flow `start`.
pub fn solve_mnat_flow_from(h: &MnatFunction, network: &FlowNetwork, start: Vec<i64>) -> Result<FlowSolution> {
    if h.dimension() != network.nodes {
        return invalid("boundary function dimension differs from the node count");
    }
    if !network.within_capacity(&start) {
        return invalid("start flow violates capacities");
    }
    let mut current = evaluate_flow(h, network, start);
    let mut value = current
        .objective
        .clone()
        .into_finite()
        .ok_or_else(|| Error::EmptyDomain("start flow has infinite objective".into()))?;
    loop {
        let edges = residual_edges(h, network, &current.flow);
        let Some(mean) = min_cycle_mean(network.nodes, &edges) else {
            break;
        };
        if !mean.is_negative() {
            break;
        }
        let cycle = best_cycle(network.nodes, &edges, &mean)
            .ok_or_else(|| Error::Internal("minimum-mean cycle not recovered".into()))?;
        let unbounded = cycle.iter().all(|&i| match edges[i].kind {
            Move::Flow(a, forward) => {
                let arc = &network.arcs[a];
                if forward {
                    arc.upper.is_none()
                } else {
                    arc.lower.is_none()
                }
            }
            Move::Exchange => false,
        });
        if unbounded {
            return Err(Error::Unbounded("negative cycle of uncapacitated arcs".into()));
        }
        let mut flow = current.flow.clone();
        for &i in &cycle {
            if let Move::Flow(a, forward) = edges[i].kind {
                flow[a] += if forward { 1 } else { -1 };
            }
        }
        let next = evaluate_flow(h, network, flow);
        match next.objective.finite() {
            Some(v) if *v < value => {
                value = v.clone();
                current = next;
            }
            _ => {
                return Err(Error::Internal(
                    "canceling a negative cycle did not decrease the objective".into(),
                ))
            }
        }
    }
    Ok(current)
}

/// [`solve_mnat_flow_from`] starting at the zero flow clamped into the
/// capacities.
pub fn solve_mnat_flow(h: &MnatFunction, network: &FlowNetwork) -> Result<FlowSolution> {
    let start = network
        .arcs
        .iter()
        .map(|a| {
            let x = a.lower.map_or(0, |l| l.max(0));
            a.upper.map_or(x, |u| x.min(u))
        })
        .collect();
    solve_mnat_flow_from(h, network, start)
}

/// Node numbering of the bounded-overlap network.
fn copy1(v: usize) -> usize {
    v
}

fn source(n: usize) -> usize {
    n
}

fn copy2(n: usize, v: usize) -> usize {
    n + 1 + v
}

fn sink(n: usize) -> usize {
    2 * n + 1
}

/// Checks that `f` lives on a single hyperplane inside the nonnegative
/// orthant and returns its rank.
fn m_convex_rank(f: &MnatFunction) -> Result<i64> {
    let rank = f.witness_point().sum();
    if f.box_volume() <= BOX_SCAN_LIMIT {
        for (x, _) in f.domain(BOX_SCAN_LIMIT)? {
            if x.sum() != rank || x.0.iter().any(|&c| c < 0) {
                return invalid("function domain must be nonnegative and lie on one coordinate-sum hyperplane");
            }
        }
    } else if f.lower().iter().any(|&l| l < 0) {
        return invalid("function box must lie in the nonnegative orthant");
    }
    Ok(rank)
}

fn overlap_network(w: &[Rational]) -> Result<FlowNetwork> {
    let n = w.len();
    let mut arcs = Vec::with_capacity(3 * n);
    let arc = |from, to, weight| FlowArc {
        from,
        to,
        lower: Some(0),
        upper: None,
        weight,
    };
    for (v, wv) in w.iter().enumerate() {
        arcs.push(arc(copy1(v), copy2(n, v), wv.clone()));
    }
    for v in 0..n {
        arcs.push(arc(copy1(v), sink(n), Rational::zero()));
    }
    for v in 0..n {
        arcs.push(arc(source(n), copy2(n, v), Rational::zero()));
    }
    FlowNetwork::new(2 * n + 2, arcs)
}

/// Box of the boundary function: negated first copy, source slack, second
/// copy, sink slack.
fn overlap_box(f1: &MnatFunction, f2: &MnatFunction, cap_source: i64, cap_sink: i64) -> (Vec<i64>, Vec<i64>) {
    let mut lower: Vec<i64> = f1.upper().iter().map(|u| -u).collect();
    let mut upper: Vec<i64> = f1.lower().iter().map(|l| -l).collect();
    lower.push(-cap_source);
    upper.push(0);
    lower.extend_from_slice(f2.lower());
    upper.extend_from_slice(f2.upper());
    lower.push(0);
    upper.push(cap_sink);
    (lower, upper)
}

fn split_boundary(b: &IntVector, n: usize) -> (IntVector, IntVector) {
    (
        IntVector(b.0[..n].iter().map(|c| -c).collect()),
        IntVector(b.0[n + 1..2 * n + 1].to_vec()),
    )
}

fn distance_to(x: i64, lo: i64, hi: i64) -> i64 {
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0
    }
}

/// A flow whose boundary lies in the domain of the overlap boundary
/// function, or `None` when the constraint `Σ min(x1, x2) ≥ k` cannot be met.
///
/// Minimizes the distance of the slack terms to their ranges over flows
/// whose copy boundaries stay in the two domains, from the witness pair.
fn feasible_overlap_flow(
    f1: &MnatFunction,
    f2: &MnatFunction,
    r1: i64,
    r2: i64,
    k: i64,
    network: &FlowNetwork,
) -> Result<Option<Vec<i64>>> {
    let n = f1.dimension();
    let (cap_s, cap_t) = (r2 - k, r1 - k);
    let (lower, upper) = overlap_box(f1, f2, r2, r1);
    let start = solution_to_flow(f1.witness_point(), f2.witness_point());
    let (g1, g2) = (f1.clone(), f2.clone());
    let penalty = MnatFunction::from_fn(lower, upper, boundary(&start, network), move |b| {
        let (x1, x2) = split_boundary(b, n);
        if !g1.value(&x1).is_finite() || !g2.value(&x2).is_finite() {
            return ExtValue::Infinite;
        }
        ExtValue::int(distance_to(-b.0[n], 0, cap_s) + distance_to(b.0[2 * n + 1], 0, cap_t))
    })?;
    let unweighted = FlowNetwork::new(
        network.nodes,
        network
            .arcs
            .iter()
            .map(|a| FlowArc {
                weight: Rational::zero(),
                ..a.clone()
            })
            .collect(),
    )?;
    let best = solve_mnat_flow_from(&penalty, &unweighted, start)?;
    Ok(best
        .objective
        .finite()
        .is_some_and(|v| v.is_zero())
        .then_some(best.flow))
}

struct OverlapInstance {
    h: MnatFunction,
    network: FlowNetwork,
    start: Vec<i64>,
}

fn overlap_instance(f1: &MnatFunction, f2: &MnatFunction, k: i64, w: &[Rational]) -> Result<Option<OverlapInstance>> {
    let n = f1.dimension();
    if f2.dimension() != n || w.len() != n {
        return invalid("dimension mismatch");
    }
    if w.iter().any(|x| x.is_positive()) {
        return invalid("overlap weight must be nonpositive");
    }
    let r1 = m_convex_rank(f1)?;
    let r2 = m_convex_rank(f2)?;
    if k > r1.min(r2) {
        return Ok(None);
    }
    let k = k.max(0);
    let network = overlap_network(w)?;
    let Some(start) = feasible_overlap_flow(f1, f2, r1, r2, k, &network)? else {
        return Ok(None);
    };
    let (lower, upper) = overlap_box(f1, f2, r2 - k, r1 - k);
    let (g1, g2) = (f1.clone(), f2.clone());
    let h = MnatFunction::from_fn(lower, upper, boundary(&start, &network), move |b| {
        let (x1, x2) = split_boundary(b, n);
        g1.value(&x1) + g2.value(&x2)
    })?;
    Ok(Some(OverlapInstance { h, network, start }))
}

/// The boundary function `h` and the bipartite network for
/// `min f1(x1) + f2(x2) + w(min(x1, x2))` s.t. `Σ min(x1, x2) ≥ k`, `w ≤ 0`.
///
/// Nodes: first copy `0..n`, source `n`, second copy `n+1..2n+1`, sink
/// `2n+1`. Arcs: identity arcs, then first copy to sink, then source to
/// second copy. The slack terms are zero on their ranges, so `h` is the sum
/// of the two functions inside its box.
pub fn build_mgeqk_instance(
    f1: &MnatFunction,
    f2: &MnatFunction,
    k: i64,
    w: &[Rational],
) -> Result<(MnatFunction, FlowNetwork)> {
    match overlap_instance(f1, f2, k, w)? {
        Some(inst) => Ok((inst.h, inst.network)),
        None => Err(Error::EmptyDomain(format!("no feasible pair shares {k} units"))),
    }
}

/// The flow of a feasible pair: identity arcs carry `min(x1, x2)`, the side
/// arcs carry the excesses.
pub fn solution_to_flow(x1: &IntVector, x2: &IntVector) -> Vec<i64> {
    let n = x1.len();
    let mut flow = vec![0i64; 3 * n];
    for v in 0..n {
        let (a, b) = (x1.0[v], x2.0[v]);
        flow[v] = a.min(b);
        flow[n + v] = (a - b).max(0);
        flow[2 * n + v] = (b - a).max(0);
    }
    flow
}

/// Reroutes side flow through identity arcs and reads off `(x1, x2)`.
/// Returns the rerouted flow as well.
pub fn flow_to_solution(flow: &[i64], n: usize) -> (IntVector, IntVector, Vec<i64>) {
    let mut rerouted = flow.to_vec();
    for v in 0..n {
        let shift = rerouted[n + v].min(rerouted[2 * n + v]);
        rerouted[v] += shift;
        rerouted[n + v] -= shift;
        rerouted[2 * n + v] -= shift;
    }
    let x1 = IntVector((0..n).map(|v| rerouted[v] + rerouted[n + v]).collect());
    let x2 = IntVector((0..n).map(|v| rerouted[v] + rerouted[2 * n + v]).collect());
    (x1, x2, rerouted)
}

/// `f1(x1) + f2(x2) + w(min(x1, x2))`.
pub fn overlap_objective(
    f1: &MnatFunction,
    f2: &MnatFunction,
    w: &[Rational],
    x1: &IntVector,
    x2: &IntVector,
) -> ExtValue {
    let pen: Rational = w
        .iter()
        .zip(x1.0.iter().zip(&x2.0))
        .map(|(wv, (a, b))| wv * Rational::from_integer((*a.min(b)).into()))
        .sum();
    (f1.value(x1) + f2.value(x2)).add_rational(&pen)
}

/// `min f1(x1) + f2(x2) + w(min(x1, x2))` subject to `Σ min(x1, x2) ≥ k`,
/// for M-convex `f1`, `f2` with nonnegative domains and `w ≤ 0`.
pub fn solve_m_geq_k_w(f1: &MnatFunction, f2: &MnatFunction, k: i64, w: &[Rational]) -> Result<VectorPairSolution> {
    let n = f1.dimension();
    let Some(inst) = overlap_instance(f1, f2, k, w)? else {
        return Ok(VectorPairSolution::infeasible(n));
    };
    let optimum = solve_mnat_flow_from(&inst.h, &inst.network, inst.start)?;
    let (x1, x2, _) = flow_to_solution(&optimum.flow, n);
    let value = overlap_objective(f1, f2, w, &x1, &x2);
    if value != optimum.objective {
        return Err(Error::Internal(
            "flow objective differs from the recovered pair's objective".into(),
        ));
    }
    Ok(VectorPairSolution {
        x1,
        x2,
        value,
        status: Status::Optimal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bruteforce::{brute_m_geq_k_w, DEFAULT_LIMIT};
    use crate::primitives::rat;
    use crate::valuated::{check_mnat_exchange, restrict_to_hyperplane, separable, Restricted, UnivariateTable};

    fn iv(xs: &[i64]) -> IntVector {
        IntVector(xs.to_vec())
    }

    fn net(nodes: usize, arcs: &[(usize, usize)]) -> FlowNetwork {
        FlowNetwork::new(
            nodes,
            arcs.iter()
                .map(|&(from, to)| FlowArc {
                    from,
                    to,
                    lower: Some(0),
                    upper: None,
                    weight: rat(0),
                })
                .collect(),
        )
        .unwrap()
    }

    /// `Σ_v table_v(x_v)` restricted to `Σ x = r`.
    fn m_convex(tables: Vec<UnivariateTable>, r: i64) -> MnatFunction {
        let f = crate::valuated::laminar_convex_function(&separable(tables).unwrap()).unwrap();
        match restrict_to_hyperplane(&f, r).unwrap() {
            Restricted::Function(g) => g,
            Restricted::Valuation(_) => panic!("expected an integer-box function"),
        }
    }

    #[test]
    fn boundary_examples() {
        let one = net(2, &[(0, 1)]);
        assert_eq!(boundary(&[2], &one), iv(&[-2, 2]));
        assert_eq!(boundary(&[0], &one), iv(&[0, 0]));
        let two = net(2, &[(0, 1), (1, 0)]);
        assert_eq!(boundary(&[1, 1], &two), iv(&[0, 0]));
    }

    #[test]
    fn forced_flow() {
        let network = FlowNetwork::new(
            2,
            vec![FlowArc {
                from: 0,
                to: 1,
                lower: Some(3),
                upper: Some(3),
                weight: rat(2),
            }],
        )
        .unwrap();
        let h = MnatFunction::from_fn(vec![-5, -5], vec![5, 5], iv(&[0, 0]), |b| {
            ExtValue::int(b.0[1] * b.0[1])
        })
        .unwrap();
        let sol = solve_mnat_flow(&h, &network).unwrap();
        assert_eq!(sol.flow, vec![3]);
        assert_eq!(sol.objective, ExtValue::int(9 + 6));
    }

    #[test]
    fn zero_flow_optimal_when_h_minimized_at_zero() {
        let network = net(3, &[(0, 1), (1, 2), (0, 2)]);
        let h = MnatFunction::from_fn(vec![-2; 3], vec![2; 3], iv(&[0, 0, 0]), |b| {
            ExtValue::int(b.0.iter().map(|x| x * x).sum())
        })
        .unwrap();
        assert_eq!(solve_mnat_flow(&h, &network).unwrap().objective, ExtValue::zero());
    }

    #[test]
    fn reroute_examples() {
        let (x1, x2, flow) = flow_to_solution(&[0, 2, 3], 1);
        assert_eq!(flow, vec![2, 0, 1]);
        assert_eq!((x1, x2), (iv(&[2]), iv(&[3])));
        let f = solution_to_flow(&iv(&[3]), &iv(&[1]));
        assert_eq!(f, vec![1, 2, 0]);
        assert_eq!(solution_to_flow(&iv(&[0, 0]), &iv(&[1, 2]))[..2], [0, 0]);
    }

    #[test]
    fn network_shape() {
        let sq = |hi| UnivariateTable::from_fn(0, hi, |j| rat(j * j)).unwrap();
        let f = m_convex(vec![sq(2), sq(2)], 2);
        let (h, network) = build_mgeqk_instance(&f, &f, 1, &[rat(0), rat(-1)]).unwrap();
        assert_eq!(network.arcs.len(), 6);
        assert_eq!(h.lower()[2], -1);
        assert!(check_mnat_exchange(&h).unwrap());
        assert!(build_mgeqk_instance(&f, &f, 1, &[rat(1), rat(0)]).is_err());
    }

    #[test]
    fn matches_enumeration_on_small_instances() {
        let tables = [
            vec![rat(0), rat(1), rat(4)],
            vec![rat(3), rat(0), rat(0)],
            vec![rat(-1), rat(2), rat(6)],
        ];
        let tab = |i: usize| UnivariateTable::new(0, tables[i % 3].clone()).unwrap();
        for r1 in 0..=4 {
            for r2 in 0..=4 {
                let f1 = m_convex(vec![tab(0), tab(1), tab(2)], r1);
                let f2 = m_convex(vec![tab(2), tab(0), tab(1)], r2);
                for k in 0..=4 {
                    for w in [vec![rat(0); 3], vec![rat(-2), rat(0), rat(-1)]] {
                        let fast = solve_m_geq_k_w(&f1, &f2, k, &w).unwrap();
                        let brute = brute_m_geq_k_w(&f1, &f2, k, &w, DEFAULT_LIMIT).unwrap();
                        assert_eq!(fast.value, brute.value, "r1 {r1} r2 {r2} k {k} w {w:?}");
                    }
                }
            }
        }
    }
}
