//! Exhaustive reference solvers. Every optimum is found by enumerating the
//! full feasible set; ties go to the lexicographically smallest tuple.

use crate::error::{invalid, Error, Result};
use crate::matroid::MatroidOracle;
use crate::primitives::{all_subsets, modular_sum, ExtValue, IntVector, Rational, Subset};
use crate::solution::{Status, TupleSolution, VectorPairSolution};
use crate::valuated::{from_matroid_and_weights, MnatFunction, ValuationOracle};
use crate::viap::IntersectionSolution;

/// Default cap on the number of enumerated candidates.
pub const DEFAULT_LIMIT: u128 = 1_000_000;

fn domain(omega: &ValuationOracle, limit: u128) -> Result<Vec<(Subset, Rational)>> {
    omega.domain(usize::try_from(limit).unwrap_or(usize::MAX))
}

/// Minimizes `Σ ω_i(X_i) + extra(X)` over all domain tuples.
fn best_tuple(omegas: &[ValuationOracle], limit: u128, extra: impl Fn(&[Subset]) -> ExtValue) -> Result<TupleSolution> {
    let domains: Vec<Vec<(Subset, Rational)>> = omegas.iter().map(|o| domain(o, limit)).collect::<Result<_>>()?;
    let total = domains.iter().fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128));
    if total > limit {
        return Err(Error::ResourceLimit(format!(
            "{total} candidate tuples exceed limit {limit}"
        )));
    }
    if total == 0 {
        return Ok(TupleSolution::infeasible());
    }
    let mut idx = vec![0usize; domains.len()];
    let mut best: Option<(Rational, Vec<Subset>)> = None;
    loop {
        let sets: Vec<Subset> = idx.iter().zip(&domains).map(|(&i, d)| d[i].0).collect();
        let base: Rational = idx.iter().zip(&domains).map(|(&i, d)| &d[i].1).sum();
        if let Some(extra) = extra(&sets).into_finite() {
            let val = base + extra;
            let better = match &best {
                None => true,
                Some((b, bs)) => val < *b || (val == *b && sets < *bs),
            };
            if better {
                best = Some((val, sets));
            }
        }
        let mut pos = domains.len();
        loop {
            if pos == 0 {
                return Ok(match best {
                    Some((v, sets)) => TupleSolution {
                        sets,
                        value: ExtValue::Finite(v),
                        status: Status::Optimal,
                        witness: None,
                    },
                    None => TupleSolution::infeasible(),
                });
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < domains[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn as_pair(sol: TupleSolution, n: usize) -> IntersectionSolution {
    let (x1, x2) = match sol.sets.as_slice() {
        [a, b] => (*a, *b),
        _ => (Subset::empty(n), Subset::empty(n)),
    };
    IntersectionSolution {
        x1,
        x2,
        value: sol.value,
        status: sol.status,
        witness: None,
        witness_is_dual: false,
        oracle_calls: 0,
        augmentations: 0,
    }
}

fn brute_pair(
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
    limit: u128,
    extra: impl Fn(&Subset, &Subset) -> ExtValue,
) -> Result<IntersectionSolution> {
    if omega1.ground_size() != omega2.ground_size() {
        return invalid("valuations over different ground sets");
    }
    let sol = best_tuple(&[omega1.clone(), omega2.clone()], limit, |s| extra(&s[0], &s[1]))?;
    Ok(as_pair(sol, omega1.ground_size()))
}

fn gate(ok: bool) -> ExtValue {
    if ok {
        ExtValue::zero()
    } else {
        ExtValue::Infinite
    }
}

pub fn brute_v_geq_k(
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
    k: usize,
    limit: u128,
) -> Result<IntersectionSolution> {
    brute_pair(omega1, omega2, limit, |a, b| gate(a.intersection(b).len() >= k))
}

pub fn brute_v_eq_k(
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
    k: usize,
    limit: u128,
) -> Result<IntersectionSolution> {
    brute_pair(omega1, omega2, limit, |a, b| gate(a.intersection(b).len() == k))
}

pub fn brute_v_leq_k(
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
    k: usize,
    limit: u128,
) -> Result<IntersectionSolution> {
    brute_pair(omega1, omega2, limit, |a, b| gate(a.intersection(b).len() <= k))
}

/// `min ω1(X1) + ω2(X2) + c(|X1 ∩ X2|)`; `c` beyond its length is `+inf`.
pub fn brute_v_c(
    omega1: &ValuationOracle,
    omega2: &ValuationOracle,
    c: &[ExtValue],
    limit: u128,
) -> Result<IntersectionSolution> {
    brute_pair(omega1, omega2, limit, |a, b| {
        c.get(a.intersection(b).len()).cloned().unwrap_or(ExtValue::Infinite)
    })
}

/// `min Σ ω_i(X_i)` subject to `∩X_i` independent in `indep`.
pub fn brute_v_in(omegas: &[ValuationOracle], indep: &MatroidOracle, limit: u128) -> Result<TupleSolution> {
    let n = indep.ground_size();
    best_tuple(omegas, limit, |sets| {
        let cap = sets.iter().fold(Subset::full(n), |acc, x| acc.intersection(x));
        gate(indep.is_independent(&cap))
    })
}

/// `min Σ ω_i(X_i) + w(∩X_i)` for any sign of `w`.
pub fn brute_v_n_w(omegas: &[ValuationOracle], w: &[Rational], limit: u128) -> Result<TupleSolution> {
    let n = w.len();
    best_tuple(omegas, limit, |sets| {
        let cap = sets.iter().fold(Subset::full(n), |acc, x| acc.intersection(x));
        ExtValue::Finite(modular_sum(w, &cap))
    })
}

/// Per-element usage counts of a tuple of sets.
pub fn usage_counts(sets: &[Subset], n: usize) -> Vec<i64> {
    (0..n)
        .map(|v| sets.iter().filter(|x| x.contains(v)).count() as i64)
        .collect()
}

/// `min Σ ω_i(X_i) + φ(usage counts)`.
pub fn brute_sum_plus_counts(
    omegas: &[ValuationOracle],
    phi: impl Fn(&[i64]) -> ExtValue,
    limit: u128,
) -> Result<TupleSolution> {
    let n = omegas.first().map_or(0, |o| o.ground_size());
    best_tuple(omegas, limit, |sets| phi(&usage_counts(sets, n)))
}

/// Social optimum `Σ ω_i(X_i) + Σ_v x_v · d_v(x_v)`, with `d_v` given on
/// `0..len` and `+inf` beyond.
pub fn brute_congestion(omegas: &[ValuationOracle], delays: &[Vec<Rational>], limit: u128) -> Result<TupleSolution> {
    brute_sum_plus_counts(
        omegas,
        |counts| {
            let mut total = ExtValue::zero();
            for (x, d) in counts.iter().zip(delays) {
                total += match d.get(*x as usize) {
                    Some(q) => ExtValue::Finite(q * Rational::from_integer((*x).into())),
                    None => ExtValue::Infinite,
                };
            }
            total
        },
        limit,
    )
}

/// `min w1(X1) + w2(X2) + q(X1 ∩ X2)` over bases of `m1` and `m2`.
pub fn brute_copic(
    m1: &MatroidOracle,
    m2: &MatroidOracle,
    w1: &[Rational],
    w2: &[Rational],
    q: &[Rational],
    limit: u128,
) -> Result<IntersectionSolution> {
    let o1 = from_matroid_and_weights(m1, w1)?;
    let o2 = from_matroid_and_weights(m2, w2)?;
    brute_pair(&o1, &o2, limit, |a, b| {
        ExtValue::Finite(modular_sum(q, &a.intersection(b)))
    })
}

/// `min f1(x1) + f2(x2) + w(min(x1, x2))` subject to `Σ min(x1, x2) ≥ k`.
pub fn brute_m_geq_k_w(
    f1: &MnatFunction,
    f2: &MnatFunction,
    k: i64,
    w: &[Rational],
    limit: u128,
) -> Result<VectorPairSolution> {
    let n = f1.dimension();
    if f2.dimension() != n || w.len() != n {
        return invalid("dimension mismatch");
    }
    let d1 = f1.domain(limit)?;
    let d2 = f2.domain(limit)?;
    let total = (d1.len() as u128).saturating_mul(d2.len() as u128);
    if total > limit {
        return Err(Error::ResourceLimit(format!(
            "{total} candidate pairs exceed limit {limit}"
        )));
    }
    let mut best: Option<(Rational, &IntVector, &IntVector)> = None;
    for (x1, v1) in &d1 {
        for (x2, v2) in &d2 {
            let mins: Vec<i64> = x1.0.iter().zip(&x2.0).map(|(a, b)| *a.min(b)).collect();
            if mins.iter().sum::<i64>() < k {
                continue;
            }
            let pen: Rational = w
                .iter()
                .zip(&mins)
                .map(|(wv, m)| wv * Rational::from_integer((*m).into()))
                .sum();
            let val = v1 + v2 + pen;
            let better = match &best {
                None => true,
                Some((b, b1, b2)) => val < *b || (val == *b && (x1, x2) < (*b1, *b2)),
            };
            if better {
                best = Some((val, x1, x2));
            }
        }
    }
    Ok(match best {
        Some((v, x1, x2)) => VectorPairSolution {
            x1: x1.clone(),
            x2: x2.clone(),
            value: ExtValue::Finite(v),
            status: Status::Optimal,
        },
        None => VectorPairSolution::infeasible(n),
    })
}

/// A maximum common independent set of three matroids.
pub fn brute_three_matroid_intersection(
    m1: &MatroidOracle,
    m2: &MatroidOracle,
    m3: &MatroidOracle,
    limit: u128,
) -> Result<Subset> {
    let n = m1.ground_size();
    if m2.ground_size() != n || m3.ground_size() != n {
        return invalid("matroids over different ground sets");
    }
    if n >= 64 || (1u128 << n) > limit {
        return Err(Error::ResourceLimit(format!("2^{n} subsets exceed limit {limit}")));
    }
    let mut best = Subset::empty(n);
    for x in all_subsets(n) {
        if x.len() > best.len() && m1.is_independent(&x) && m2.is_independent(&x) && m3.is_independent(&x) {
            best = x;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{make_free, make_partition, make_uniform};
    use crate::primitives::rat;
    use crate::valuated::{from_table, size_constrained_modular};

    fn set(n: usize, xs: &[usize]) -> Subset {
        Subset::from_indices(n, xs.iter().copied())
    }

    fn modular(w: &[i64], r: usize) -> ValuationOracle {
        size_constrained_modular(&w.iter().map(|&x| rat(x)).collect::<Vec<_>>(), r).unwrap()
    }

    #[test]
    fn pair_examples() {
        let (o1, o2) = (modular(&[1, 2, 4], 2), modular(&[4, 2, 1], 2));
        assert_eq!(
            brute_v_geq_k(&o1, &o2, 2, DEFAULT_LIMIT).unwrap().value,
            ExtValue::int(9)
        );
        let o = modular(&[1, 2, 3, 4], 2);
        let s = brute_v_geq_k(&o, &o, 0, DEFAULT_LIMIT).unwrap();
        assert_eq!(s.value, ExtValue::int(6));
        let a = from_table(2, &[(set(2, &[0]), rat(0))]).unwrap();
        let b = from_table(2, &[(set(2, &[1]), rat(0))]).unwrap();
        assert_eq!(
            brute_v_geq_k(&a, &b, 1, DEFAULT_LIMIT).unwrap().status,
            Status::Infeasible
        );
    }

    #[test]
    fn decoupled_cases() {
        let os = vec![modular(&[3, 1, 2], 1), modular(&[0, 5, 1], 2)];
        let s = brute_v_in(&os, &make_free(3), DEFAULT_LIMIT).unwrap();
        assert_eq!(s.value, ExtValue::int(2));
        let s = brute_v_n_w(&os, &vec![rat(0); 3], DEFAULT_LIMIT).unwrap();
        assert_eq!(s.value, ExtValue::int(2));
    }

    #[test]
    fn three_matroid_examples() {
        let free = make_free(4);
        assert_eq!(
            brute_three_matroid_intersection(&free, &free, &free, DEFAULT_LIMIT).unwrap(),
            Subset::full(4)
        );
        let zero = make_uniform(4, 0).unwrap();
        assert!(brute_three_matroid_intersection(&free, &zero, &free, DEFAULT_LIMIT)
            .unwrap()
            .is_empty());
        let p1 = make_partition(4, &[(set(4, &[0, 1]), 1), (set(4, &[2, 3]), 1)]).unwrap();
        let p2 = make_partition(4, &[(set(4, &[0, 2]), 1), (set(4, &[1, 3]), 1)]).unwrap();
        let p3 = make_partition(4, &[(set(4, &[0, 3]), 1), (set(4, &[1, 2]), 1)]).unwrap();
        let best = brute_three_matroid_intersection(&p1, &p2, &p3, DEFAULT_LIMIT).unwrap();
        assert_eq!(best.len(), 1);
    }

    #[test]
    fn limit_is_enforced() {
        let o = modular(&[0; 10], 5);
        assert!(matches!(brute_v_geq_k(&o, &o, 1, 1000), Err(Error::ResourceLimit(_))));
    }
}
