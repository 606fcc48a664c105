//! Application drivers: recoverable robust selection under interval
//! uncertainty, overlap-dependent costs, diagonal interaction costs, and
//! social optima of matroid congestion games.

use num_traits::{Signed, Zero};

use crate::error::{invalid, Result};
use crate::matroid::MatroidOracle;
use crate::mflow::solve_m_geq_k_w;
use crate::primitives::{modular_sum, vector_to_subset, ExtValue, IntVector, Rational, Subset};
use crate::solution::{Status, TupleSolution, VectorPairSolution};
use crate::valuated::{
    from_matroid_and_weights, LaminarSpec, MnatFunction, UnivariateTable, ValuationOracle, DEFAULT_CHECK_LIMIT,
};
use crate::viap::{solve_v_eq_k, solve_v_geq_k, IntersectionSolution};
use crate::vmi::{solve_sum_valuated_plus_laminar, solve_v_n_w};

/// Elementwise bounds `lower ≤ w ≤ upper` on the second-stage weights.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalUncertainty {
    pub lower: Vec<Rational>,
    pub upper: Vec<Rational>,
}

impl IntervalUncertainty {
    pub fn new(lower: Vec<Rational>, upper: Vec<Rational>) -> Result<Self> {
        if lower.len() != upper.len() {
            return invalid("interval bounds differ in length");
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return invalid("interval lower bound exceeds upper bound");
        }
        Ok(IntervalUncertainty { lower, upper })
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }
}

fn pair_solution(x1: Subset, x2: Subset, value: ExtValue, status: Status) -> IntersectionSolution {
    IntersectionSolution {
        x1,
        x2,
        value,
        status,
        witness: None,
        witness_is_dual: false,
        oracle_calls: 0,
        augmentations: 0,
    }
}

fn infeasible_pair(n: usize) -> IntersectionSolution {
    pair_solution(
        Subset::empty(n),
        Subset::empty(n),
        ExtValue::Infinite,
        Status::Infeasible,
    )
}

/// `min ω1(X1) + max_w w(X2)` over bases of `dom ω1` with `|X1 ∩ X2| ≥ k`.
/// The adversary's best response is always the upper bound.
pub fn solve_recoverable_robust_interval(
    omega1: &ValuationOracle,
    unc: &IntervalUncertainty,
    k: usize,
) -> Result<IntersectionSolution> {
    let n = omega1.ground_size();
    if unc.len() != n {
        return invalid("uncertainty bounds do not match the ground set");
    }
    let first = omega1.clone();
    let upper = unc.upper.clone();
    let second = ValuationOracle::from_fn(
        n,
        omega1.rank(),
        omega1.witness_base(),
        "worst-case-second-stage",
        move |x| {
            if first.in_domain(x) {
                ExtValue::Finite(modular_sum(&upper, x))
            } else {
                ExtValue::Infinite
            }
        },
    )?;
    solve_v_geq_k(omega1, &second, k)
}

/// The integer-vector version: `min f1(x1) + (f2 + w̄)(x2)` with
/// `Σ min(x1, x2) ≥ k`.
pub fn solve_recoverable_robust_m_convex(
    f1: &MnatFunction,
    f2: &MnatFunction,
    unc: &IntervalUncertainty,
    k: i64,
) -> Result<VectorPairSolution> {
    let n = f1.dimension();
    if unc.len() != n || f2.dimension() != n {
        return invalid("dimension mismatch");
    }
    let inner = f2.clone();
    let upper = unc.upper.clone();
    let shifted = MnatFunction::from_fn(
        f2.lower().to_vec(),
        f2.upper().to_vec(),
        f2.witness_point().clone(),
        move |x| {
            let linear: Rational = upper
                .iter()
                .zip(&x.0)
                .map(|(w, &c)| w * Rational::from_integer(c.into()))
                .sum();
            inner.value(x).add_rational(&linear)
        },
    )?;
    solve_m_geq_k_w(f1, &shifted, k, &vec![Rational::zero(); n])
}

/// `min ω1(X1) + ω2(X2) + c(|X1 ∩ X2|)`; `c` beyond its length is `+inf`.
/// Ties go to the smallest overlap.
pub fn solve_v_c(omega1: &ValuationOracle, omega2: &ValuationOracle, c: &[ExtValue]) -> Result<IntersectionSolution> {
    let n = omega1.ground_size();
    let mut best = infeasible_pair(n);
    for (k, ck) in c.iter().enumerate().take(n + 1) {
        if !ck.is_finite() {
            continue;
        }
        let sol = solve_v_eq_k(omega1, omega2, k)?;
        if !sol.is_optimal() {
            continue;
        }
        let total = sol.value.clone() + ck.clone();
        if total < best.value {
            best = pair_solution(sol.x1, sol.x2, total, Status::Optimal);
        }
    }
    Ok(best)
}

/// 0/1 indicator of bases of `m` plus linear weights, as an integer-vector
/// function on `{0,1}^n`.
fn matroid_function(m: &MatroidOracle, w: &[Rational]) -> Result<MnatFunction> {
    let n = m.ground_size();
    let base = m.some_base().to_vector();
    let (m, w) = (m.clone(), w.to_vec());
    MnatFunction::from_fn(vec![0; n], vec![1; n], base, move |x| match vector_to_subset(x) {
        Some(s) if m.is_base(&s) => ExtValue::Finite(modular_sum(&w, &s)),
        _ => ExtValue::Infinite,
    })
}

/// `min w1(X1) + w2(X2) + q(X1 ∩ X2)` over bases of `m1`, `m2`, for `q`
/// of one sign.
pub fn solve_copic_diagonal(
    m1: &MatroidOracle,
    m2: &MatroidOracle,
    w1: &[Rational],
    w2: &[Rational],
    q: &[Rational],
) -> Result<IntersectionSolution> {
    let n = m1.ground_size();
    if m2.ground_size() != n || w1.len() != n || w2.len() != n || q.len() != n {
        return invalid("dimension mismatch");
    }
    if q.iter().all(|x| !x.is_negative()) {
        let omegas = [from_matroid_and_weights(m1, w1)?, from_matroid_and_weights(m2, w2)?];
        let sol = solve_v_n_w(&omegas, q)?;
        return Ok(tuple_to_pair(sol, n));
    }
    if q.iter().any(|x| x.is_positive()) {
        return invalid("interaction costs of mixed sign; use the brute-force oracle");
    }
    let sol = solve_m_geq_k_w(&matroid_function(m1, w1)?, &matroid_function(m2, w2)?, 0, q)?;
    if !sol.is_optimal() {
        return Ok(infeasible_pair(n));
    }
    let to_set = |x: &IntVector| vector_to_subset(x).expect("0/1 solution");
    Ok(pair_solution(
        to_set(&sol.x1),
        to_set(&sol.x2),
        sol.value,
        Status::Optimal,
    ))
}

fn tuple_to_pair(sol: TupleSolution, n: usize) -> IntersectionSolution {
    if !sol.is_optimal() {
        return infeasible_pair(n);
    }
    pair_solution(sol.sets[0], sol.sets[1], sol.value, Status::Optimal)
}

/// True iff `(x+1) d(x+1) - x d(x)` is nondecreasing over the table, that
/// is, iff `x ↦ x d(x)` is discrete convex.
pub fn check_weak_convexity(d: &[Rational]) -> bool {
    let load: Vec<Rational> = d
        .iter()
        .enumerate()
        .map(|(x, dx)| dx * Rational::from_integer((x as i64).into()))
        .collect();
    load.windows(3).all(|t| &t[1] - &t[0] <= &t[2] - &t[1])
}

/// Players choosing bases, with per-resource delays `d_v(0..len)`.
#[derive(Clone, Debug)]
pub struct CongestionInstance {
    pub players: Vec<ValuationOracle>,
    /// `delays[v][x]` is the delay on resource `v` used by `x` players.
    pub delays: Vec<Vec<Rational>>,
}

impl CongestionInstance {
    /// Validates nondecreasing nonnegative delays, and nonnegative player
    /// costs when the domains are small enough to scan.
    pub fn new(players: Vec<ValuationOracle>, delays: Vec<Vec<Rational>>) -> Result<Self> {
        let Some(first) = players.first() else {
            return invalid("congestion game without players");
        };
        let n = first.ground_size();
        if players.iter().any(|o| o.ground_size() != n) || delays.len() != n {
            return invalid("players and delays must share one ground set");
        }
        for d in &delays {
            if d.is_empty() || d.iter().any(|x| x.is_negative()) || d.windows(2).any(|p| p[0] > p[1]) {
                return invalid("delays must be nonempty, nonnegative and nondecreasing");
            }
        }
        for o in &players {
            if let Ok(dom) = o.domain(DEFAULT_CHECK_LIMIT) {
                if dom.iter().any(|(_, v)| v.is_negative()) {
                    return invalid("player costs must be nonnegative");
                }
            }
        }
        Ok(CongestionInstance { players, delays })
    }

    /// The standard model: player `i` picks a base of `matroids[i]` and pays
    /// `c_v(x_v)` on each chosen resource; `costs[v][x]` for `x ≥ 1`, with
    /// `costs[v][0]` ignored.
    pub fn from_standard_model(matroids: &[MatroidOracle], costs: &[Vec<Rational>]) -> Result<Self> {
        if costs.iter().any(|c| c.len() < 2) {
            return invalid("resource costs must cover at least one user");
        }
        let unit: Vec<Rational> = costs.iter().map(|c| c[1].clone()).collect();
        let players = matroids
            .iter()
            .map(|m| from_matroid_and_weights(m, &unit))
            .collect::<Result<Vec<_>>>()?;
        let delays = costs
            .iter()
            .map(|c| {
                std::iter::once(Rational::zero())
                    .chain(c[1..].iter().map(|x| x - &c[1]))
                    .collect()
            })
            .collect();
        CongestionInstance::new(players, delays)
    }

    /// `Σ ω_i(X_i) + Σ_v x_v d_v(x_v)` for a state.
    pub fn total_cost(&self, state: &[Subset]) -> ExtValue {
        let n = self.delays.len();
        let mut total = ExtValue::zero();
        for (o, x) in self.players.iter().zip(state) {
            total += o.value(x);
        }
        for v in 0..n {
            let users = state.iter().filter(|x| x.contains(v)).count();
            total += match self.delays[v].get(users) {
                Some(d) => ExtValue::Finite(d * Rational::from_integer((users as i64).into())),
                None => ExtValue::Infinite,
            };
        }
        total
    }
}

/// A state minimizing total cost, through the usage-count reduction with
/// the separable load `Σ_v x_v d_v(x_v)`.
pub fn solve_congestion_social_optimum(inst: &CongestionInstance) -> Result<TupleSolution> {
    if let Some(v) = inst.delays.iter().position(|d| !check_weak_convexity(d)) {
        return invalid(format!("delay on resource {v} is not weakly convex"));
    }
    let n = inst.delays.len();
    let players = inst.players.len();
    let mut members = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for (v, d) in inst.delays.iter().enumerate() {
        let top = (d.len() - 1).min(players);
        let load = (0..=top)
            .map(|x| &d[x] * Rational::from_integer((x as i64).into()))
            .collect();
        members.push((Subset::from_indices(n, [v]), UnivariateTable::new(0, load)?));
        upper.push(top as i64);
    }
    let phi = LaminarSpec::new(members, vec![0; n], upper)?;
    solve_sum_valuated_plus_laminar(&inst.players, &phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::make_uniform;
    use crate::primitives::{rat, ratio};

    fn ws(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn recoverable_robust_example() {
        let m = make_uniform(2, 1).unwrap();
        let o1 = from_matroid_and_weights(&m, &ws(&[1, 3])).unwrap();
        let unc = IntervalUncertainty::new(ws(&[0, 0]), ws(&[2, 2])).unwrap();
        let sol = solve_recoverable_robust_interval(&o1, &unc, 1).unwrap();
        assert_eq!(sol.value, ExtValue::int(3));
        assert_eq!(
            (sol.x1, sol.x2),
            (Subset::from_indices(2, [0]), Subset::from_indices(2, [0]))
        );
        assert_eq!(
            solve_recoverable_robust_interval(&o1, &unc, 0).unwrap().value,
            ExtValue::int(3)
        );
        assert!(IntervalUncertainty::new(ws(&[3]), ws(&[2])).is_err());
    }

    #[test]
    fn recoverable_robust_vector_version_matches_set_version() {
        let m = make_uniform(3, 2).unwrap();
        let w1 = ws(&[1, 5, 2]);
        let unc = IntervalUncertainty::new(ws(&[0, 0, 0]), ws(&[4, 1, 3])).unwrap();
        let f1 = matroid_function(&m, &w1).unwrap();
        let f2 = matroid_function(&m, &ws(&[0, 0, 0])).unwrap();
        let o1 = from_matroid_and_weights(&m, &w1).unwrap();
        for k in 0..=2 {
            let a = solve_recoverable_robust_interval(&o1, &unc, k).unwrap();
            let b = solve_recoverable_robust_m_convex(&f1, &f2, &unc, k as i64).unwrap();
            assert_eq!(a.value, b.value);
        }
    }

    #[test]
    fn overlap_cost_examples() {
        let m = make_uniform(3, 2).unwrap();
        let o = from_matroid_and_weights(&m, &ws(&[1, 2, 4])).unwrap();
        let inf = ExtValue::Infinite;
        let c = vec![inf.clone(), ExtValue::int(2), ExtValue::zero(), inf.clone()];
        assert_eq!(solve_v_c(&o, &o, &c).unwrap().value, ExtValue::int(6));
        let flat = vec![ExtValue::zero(); 4];
        assert_eq!(solve_v_c(&o, &o, &flat).unwrap().value, ExtValue::int(6));
        let only1 = vec![inf.clone(), ExtValue::zero(), inf.clone(), inf];
        assert_eq!(solve_v_c(&o, &o, &only1).unwrap().value, ExtValue::int(8));
    }

    #[test]
    fn copic_examples() {
        let m = make_uniform(2, 1).unwrap();
        let z = ws(&[0, 0]);
        let pos = solve_copic_diagonal(&m, &m, &z, &z, &ws(&[5, 5])).unwrap();
        assert_eq!(pos.value, ExtValue::zero());
        assert_ne!(pos.x1, pos.x2);
        let neg = solve_copic_diagonal(&m, &m, &z, &z, &ws(&[-5, -5])).unwrap();
        assert_eq!(neg.value, ExtValue::int(-5));
        assert_eq!(neg.x1, neg.x2);
        assert_eq!(
            solve_copic_diagonal(&m, &m, &ws(&[1, 0]), &z, &z).unwrap().value,
            ExtValue::zero()
        );
        assert!(solve_copic_diagonal(&m, &m, &z, &z, &ws(&[5, -5])).is_err());
    }

    #[test]
    fn weak_convexity_examples() {
        assert!(check_weak_convexity(&ws(&[0, 1, 2, 3])));
        assert!(check_weak_convexity(&ws(&[4, 4, 4])));
        assert!(check_weak_convexity(&[rat(0), rat(10), ratio(21, 2)]));
        assert!(!check_weak_convexity(&ws(&[0, 10, 5])));
    }

    #[test]
    fn congestion_examples() {
        let m = make_uniform(2, 1).unwrap();
        let zero = from_matroid_and_weights(&m, &ws(&[0, 0])).unwrap();
        let inst =
            CongestionInstance::new(vec![zero.clone(), zero.clone()], vec![ws(&[0, 1, 2]), ws(&[0, 1, 2])]).unwrap();
        let sol = solve_congestion_social_optimum(&inst).unwrap();
        assert_eq!(sol.value, ExtValue::int(2));
        assert_ne!(sol.sets[0], sol.sets[1]);
        assert_eq!(inst.total_cost(&sol.sets), sol.value);

        let one = CongestionInstance::new(
            vec![from_matroid_and_weights(&m, &ws(&[3, 1])).unwrap()],
            vec![ws(&[0, 5]), ws(&[0, 1])],
        )
        .unwrap();
        assert_eq!(solve_congestion_social_optimum(&one).unwrap().value, ExtValue::int(2));

        let bad = CongestionInstance::new(vec![zero.clone(), zero], vec![ws(&[0, 10, 5]), ws(&[0, 0, 0])]);
        assert!(bad.is_err());
        let nonconvex = CongestionInstance::new(
            vec![from_matroid_and_weights(&m, &ws(&[0, 0])).unwrap(); 3],
            vec![ws(&[0, 1, 10, 10]), ws(&[0, 0, 0, 0])],
        )
        .unwrap();
        assert!(!check_weak_convexity(&nonconvex.delays[0]));
        assert!(solve_congestion_social_optimum(&nonconvex).is_err());
    }

    #[test]
    fn standard_model_embedding() {
        let m = make_uniform(3, 2).unwrap();
        let costs = vec![ws(&[0, 2, 3, 5]), ws(&[0, 1, 4, 9]), ws(&[0, 3, 3, 3])];
        let inst = CongestionInstance::from_standard_model(&[m.clone(), m.clone(), m], &costs).unwrap();
        let state = [
            Subset::from_indices(3, [0, 1]),
            Subset::from_indices(3, [1, 2]),
            Subset::from_indices(3, [0, 1]),
        ];
        // Direct: resource 0 has 2 users, 1 has 3, 2 has 1.
        let direct = rat(2 * 3 + 3 * 9 + 3);
        assert_eq!(inst.total_cost(&state), ExtValue::Finite(direct));
    }
}
