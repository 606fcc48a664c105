//! Value oracles for valuated matroids and the constructions used by the
//! reductions: weights on a matroid, duals, disjoint sums, the
//! intersection-constraint indicator and the laminar intersection penalty.
//!
//! A valuated matroid here is M-convex (minimization convention): a set
//! function `2^V -> Q ∪ {+inf}` whose effective domain is a base family and
//! which satisfies the quantitative exchange inequality.

mod mnat;

pub use mnat::{
    check_mnat_exchange, check_mnat_exchange_with_limit, laminar_convex_function, restrict_to_hyperplane, separable,
    LaminarSpec, MnatFunction, Restricted, UnivariateTable, BOX_SCAN_LIMIT,
};

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::matroid::MatroidOracle;
use crate::primitives::{all_nonnegative, k_subsets, modular_sum, ExtValue, Rational, Subset, MAX_GROUND};

/// Default cap on the number of domain points an exhaustive check may scan.
pub const DEFAULT_CHECK_LIMIT: usize = 20_000;

type ValueFn = dyn Fn(&Subset) -> ExtValue + Send + Sync;

struct OracleInner {
    ground: usize,
    rank: usize,
    witness: Subset,
    kind: String,
    eval: Box<ValueFn>,
    memo: Mutex<HashMap<Subset, ExtValue>>,
    calls: AtomicU64,
    evaluations: AtomicU64,
}

/// A queryable valuated matroid with known rank and one finite point.
///
/// Queries are memoized; clones share the memo and the counters.
#[derive(Clone)]
pub struct ValuationOracle {
    inner: Arc<OracleInner>,
}

impl fmt::Debug for ValuationOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValuationOracle")
            .field("kind", &self.inner.kind)
            .field("ground", &self.inner.ground)
            .field("rank", &self.inner.rank)
            .field("witness", &self.inner.witness)
            .finish()
    }
}

impl ValuationOracle {
    /// Wraps a value function. Points of the wrong cardinality are never
    /// passed to `eval`; they are `+inf` by definition.
    pub fn from_fn(
        ground: usize,
        rank: usize,
        witness: Subset,
        kind: impl Into<String>,
        eval: impl Fn(&Subset) -> ExtValue + Send + Sync + 'static,
    ) -> Result<Self> {
        let kind = kind.into();
        if ground > MAX_GROUND || rank > ground {
            return invalid(format!("{kind}: rank {rank} / ground {ground} out of range"));
        }
        if witness.ground_size() != ground || witness.len() != rank || !eval(&witness).is_finite() {
            return Err(Error::EmptyDomain(format!("{kind}: witness base is not in the domain")));
        }
        Ok(ValuationOracle {
            inner: Arc::new(OracleInner {
                ground,
                rank,
                witness,
                kind,
                eval: Box::new(eval),
                memo: Mutex::new(HashMap::new()),
                calls: AtomicU64::new(0),
                evaluations: AtomicU64::new(0),
            }),
        })
    }

    pub fn ground_size(&self) -> usize {
        self.inner.ground
    }

    pub fn rank(&self) -> usize {
        self.inner.rank
    }

    pub fn witness_base(&self) -> Subset {
        self.inner.witness
    }

    pub fn kind(&self) -> &str {
        &self.inner.kind
    }

    pub fn value(&self, x: &Subset) -> ExtValue {
        self.inner.calls.fetch_add(1, Ordering::Relaxed);
        if x.ground_size() != self.inner.ground || x.len() != self.inner.rank {
            return ExtValue::Infinite;
        }
        if let Some(v) = self.inner.memo.lock().expect("memo poisoned").get(x) {
            return v.clone();
        }
        self.inner.evaluations.fetch_add(1, Ordering::Relaxed);
        let v = (self.inner.eval)(x);
        self.inner.memo.lock().expect("memo poisoned").insert(*x, v.clone());
        v
    }

    pub fn in_domain(&self, x: &Subset) -> bool {
        self.value(x).is_finite()
    }

    /// Total `value` calls, memo hits included.
    pub fn query_count(&self) -> u64 {
        self.inner.calls.load(Ordering::Relaxed)
    }

    /// Calls that missed the memo and reached the underlying function.
    pub fn evaluation_count(&self) -> u64 {
        self.inner.evaluations.load(Ordering::Relaxed)
    }

    /// The finite part of the function, scanning every `rank`-subset.
    pub fn domain(&self, limit: usize) -> Result<Vec<(Subset, Rational)>> {
        let count = binomial(self.ground_size(), self.rank());
        if count > limit as u128 {
            return Err(Error::ResourceLimit(format!(
                "domain scan of C({}, {}) = {count} sets exceeds limit {limit}",
                self.ground_size(),
                self.rank()
            )));
        }
        Ok(k_subsets(self.ground_size(), self.rank())
            .filter_map(|x| self.value(&x).into_finite().map(|v| (x, v)))
            .collect())
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Modular weights restricted to the bases of `m`.
pub fn from_matroid_and_weights(m: &MatroidOracle, w: &[Rational]) -> Result<ValuationOracle> {
    if w.len() != m.ground_size() {
        return invalid(format!(
            "weight vector has {} entries, ground set {}",
            w.len(),
            m.ground_size()
        ));
    }
    let matroid = m.clone();
    let w = w.to_vec();
    ValuationOracle::from_fn(
        m.ground_size(),
        m.rank(),
        m.some_base(),
        "modular-on-matroid",
        move |x| {
            if matroid.is_independent(x) {
                ExtValue::Finite(modular_sum(&w, x))
            } else {
                ExtValue::Infinite
            }
        },
    )
}

/// `w(X)` when `|X| = r`, `+inf` otherwise.
pub fn size_constrained_modular(w: &[Rational], r: usize) -> Result<ValuationOracle> {
    let n = w.len();
    if r > n {
        return invalid(format!("size constraint {r} exceeds ground size {n}"));
    }
    let w = w.to_vec();
    ValuationOracle::from_fn(n, r, Subset::from_indices(n, 0..r), "size-constrained", move |x| {
        ExtValue::Finite(modular_sum(&w, x))
    })
}

/// 0/+inf indicator of an explicit base family.
pub fn indicator(ground: usize, bases: &[Subset]) -> Result<ValuationOracle> {
    let entries: Vec<(Subset, Rational)> = bases.iter().map(|b| (*b, Rational::zero())).collect();
    from_table(ground, &entries).map(|o| o.renamed("indicator"))
}

/// Explicit finite values; every unlisted set is `+inf`.
pub fn from_table(ground: usize, entries: &[(Subset, Rational)]) -> Result<ValuationOracle> {
    let Some((first, _)) = entries.first() else {
        return Err(Error::EmptyDomain("explicit valuation with no finite entries".into()));
    };
    let rank = first.len();
    if entries
        .iter()
        .any(|(x, _)| x.len() != rank || x.ground_size() != ground)
    {
        return invalid("explicit valuation entries must be equicardinal subsets of the ground set");
    }
    let table: HashMap<Subset, Rational> = entries.iter().cloned().collect();
    ValuationOracle::from_fn(ground, rank, *first, "table", move |x| {
        table.get(x).cloned().map_or(ExtValue::Infinite, ExtValue::Finite)
    })
}

impl ValuationOracle {
    fn renamed(self, kind: &str) -> ValuationOracle {
        // Only used right after construction, so the memo is still empty.
        let inner = Arc::try_unwrap(self.inner).unwrap_or_else(|_| unreachable!("fresh oracle is shared"));
        ValuationOracle {
            inner: Arc::new(OracleInner {
                kind: kind.to_string(),
                ..inner
            }),
        }
    }
}

/// `X -> omega(V \ X)`.
pub fn dual_valuation(omega: &ValuationOracle) -> ValuationOracle {
    let inner = omega.clone();
    let n = omega.ground_size();
    ValuationOracle::from_fn(
        n,
        n - omega.rank(),
        omega.witness_base().complement(),
        "dual",
        move |x| inner.value(&x.complement()),
    )
    .expect("complement of a finite witness is finite in the dual")
}

/// Disjoint sum over `n` stacked copies of `V`; copy `i` occupies
/// indices `i*|V| .. (i+1)*|V|`.
pub fn disjoint_sum(omegas: &[ValuationOracle]) -> Result<ValuationOracle> {
    let Some(first) = omegas.first() else {
        return invalid("disjoint sum of zero valuations");
    };
    let n = first.ground_size();
    if omegas.iter().any(|o| o.ground_size() != n) {
        return invalid("disjoint sum requires a common ground set");
    }
    if n * omegas.len() > MAX_GROUND {
        return invalid("stacked ground set too large");
    }
    let parts: Vec<ValuationOracle> = omegas.to_vec();
    let rank = parts.iter().map(|o| o.rank()).sum();
    let witness = Subset::concat(&parts.iter().map(|o| o.witness_base()).collect::<Vec<_>>());
    ValuationOracle::from_fn(n * parts.len(), rank, witness, "disjoint-sum", move |x| {
        let mut total = ExtValue::zero();
        for (i, o) in parts.iter().enumerate() {
            total += o.value(&x.slice(i * n, n));
            if !total.is_finite() {
                break;
            }
        }
        total
    })
}

/// Splits a stacked subset back into its `copies` blocks of size `n`.
pub fn split_stacked(x: &Subset, copies: usize, n: usize) -> Vec<Subset> {
    (0..copies).map(|i| x.slice(i * n, n)).collect()
}

/// `∩ X_i` of a stacked subset.
pub fn stacked_intersection(x: &Subset, copies: usize, n: usize) -> Subset {
    split_stacked(x, copies, n)
        .iter()
        .fold(Subset::full(n), |acc, b| acc.intersection(b))
}

/// Indicator of `{(X_1..X_n) : ∩X_i ∈ I, Σ|X_i| = r}` over the stacked set.
pub fn intersection_constraint_valuation(copies: usize, indep: &MatroidOracle, r: usize) -> Result<ValuationOracle> {
    let n = indep.ground_size();
    if copies == 0 {
        return invalid("need at least one copy");
    }
    if r > copies * n {
        return invalid(format!("rank {r} exceeds stacked ground size {}", copies * n));
    }
    if copies * n > MAX_GROUND {
        return invalid("stacked ground set too large");
    }
    // Each element may sit in up to copies-1 blocks freely; the elements
    // present in every block must form an independent set.
    let full_elems = indep.some_base();
    let max_r = (copies - 1) * n + full_elems.len();
    if r > max_r {
        return Err(Error::EmptyDomain(format!(
            "no tuple with ∩X_i independent has total size {r} (max {max_r})"
        )));
    }
    let mut counts = vec![0usize; n];
    let mut remaining = r;
    for level in 0..copies {
        for (v, count) in counts.iter_mut().enumerate() {
            if remaining == 0 {
                break;
            }
            if level == copies - 1 && !full_elems.contains(v) {
                continue;
            }
            *count += 1;
            remaining -= 1;
        }
    }
    let mut blocks = vec![Subset::empty(n); copies];
    for (v, &c) in counts.iter().enumerate() {
        for b in blocks.iter_mut().take(c) {
            b.insert(v);
        }
    }
    let witness = Subset::concat(&blocks);
    let indep = indep.clone();
    ValuationOracle::from_fn(copies * n, r, witness, "intersection-constraint", move |x| {
        if indep.is_independent(&stacked_intersection(x, copies, n)) {
            ExtValue::zero()
        } else {
            ExtValue::Infinite
        }
    })
}

/// `w(∩X_i)` restricted to `Σ|X_i| = r`, written as `Σ_v g_v(count_v)` with
/// `g_v(copies) = w(v)` and `g_v = 0` below. Requires `w ≥ 0`.
pub fn laminar_penalty(w: &[Rational], copies: usize, r: usize) -> Result<ValuationOracle> {
    if !all_nonnegative(w) {
        return invalid("laminar intersection penalty requires nonnegative weights");
    }
    laminar_penalty_unchecked(w, copies, r)
}

/// [`laminar_penalty`] without the sign check. For sign-mixed `w` the
/// result need not be a valuated matroid.
pub fn laminar_penalty_unchecked(w: &[Rational], copies: usize, r: usize) -> Result<ValuationOracle> {
    let n = w.len();
    if copies == 0 || r > copies * n || copies * n > MAX_GROUND {
        return invalid(format!(
            "laminar penalty: copies {copies}, rank {r}, ground {n} out of range"
        ));
    }
    let w = w.to_vec();
    let witness = Subset::from_indices(copies * n, 0..r);
    ValuationOracle::from_fn(copies * n, r, witness, "laminar-penalty", move |x| {
        let blocks = split_stacked(x, copies, n);
        let mut total = Rational::zero();
        for (v, wv) in w.iter().enumerate() {
            let count = blocks.iter().filter(|b| b.contains(v)).count();
            if count == copies {
                total += wv;
            }
        }
        ExtValue::Finite(total)
    })
}

/// Exhaustive check of the valuated exchange axiom over the domain:
/// for all `X, Y` in dom and `v ∈ X \ Y` some `u ∈ Y \ X` has
/// `ω(X) + ω(Y) ≥ ω(X - v + u) + ω(Y + v - u)`.
pub fn check_valuated_exchange(omega: &ValuationOracle) -> Result<bool> {
    check_valuated_exchange_with_limit(omega, DEFAULT_CHECK_LIMIT)
}

pub fn check_valuated_exchange_with_limit(omega: &ValuationOracle, limit: usize) -> Result<bool> {
    let n = omega.ground_size();
    if n > 24 {
        return Err(Error::ResourceLimit(format!(
            "exchange check over |V| = {n} exceeds 24"
        )));
    }
    let dom = omega.domain(limit)?;
    // Scale to integers; use i128 when every scaled value fits.
    let lcm = dom.iter().fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
    let scaled: Vec<BigInt> = dom
        .iter()
        .map(|(_, v)| (v * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let points: Vec<Subset> = dom.iter().map(|(x, _)| *x).collect();
    if let Some(small) = scaled
        .iter()
        .map(|b| b.to_i128().filter(|v| v.abs() < 1i128 << 100))
        .collect::<Option<Vec<i128>>>()
    {
        Ok(exchange_holds(&points, &small))
    } else {
        Ok(exchange_holds(&points, &scaled))
    }
}

fn exchange_holds<T>(points: &[Subset], values: &[T]) -> bool
where
    T: Clone + Ord,
    for<'a> &'a T: std::ops::Add<&'a T, Output = T>,
{
    let lookup: HashMap<u128, &T> = points.iter().map(|x| x.bits()).zip(values).collect();
    for (x, fx) in points.iter().zip(values) {
        for (y, fy) in points.iter().zip(values) {
            let lhs = fx + fy;
            let xy = x.difference(y);
            let yx = y.difference(x);
            for v in xy.iter() {
                let ok = yx.iter().any(|u| {
                    let a = lookup.get(&x.exchange(v, u).bits());
                    let b = lookup.get(&y.exchange(u, v).bits());
                    match (a, b) {
                        (Some(a), Some(b)) => lhs >= *a + *b,
                        _ => false,
                    }
                });
                if !ok {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::{check_base_exchange, make_free, make_graphic, make_uniform, ExplicitBaseFamily};
    use crate::primitives::{rat, ratio};

    fn set(n: usize, xs: &[usize]) -> Subset {
        Subset::from_indices(n, xs.iter().copied())
    }

    fn ws(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn modular_on_matroid_examples() {
        let u23 = make_uniform(3, 2).unwrap();
        let omega = from_matroid_and_weights(&u23, &ws(&[1, 2, 4])).unwrap();
        assert_eq!(omega.value(&set(3, &[0, 1])), ExtValue::int(3));
        assert_eq!(omega.value(&set(3, &[0])), ExtValue::Infinite);
        let delta = from_matroid_and_weights(&u23, &ws(&[0, 0, 0])).unwrap();
        for x in k_subsets(3, 2) {
            assert_eq!(delta.value(&x), ExtValue::zero());
        }
    }

    #[test]
    fn size_constrained_examples() {
        let o = size_constrained_modular(&ws(&[1, 2, 4]), 2).unwrap();
        assert_eq!(o.value(&set(3, &[0, 2])), ExtValue::int(5));
        let o0 = size_constrained_modular(&ws(&[1, 2, 4]), 0).unwrap();
        assert_eq!(o0.value(&Subset::empty(3)), ExtValue::zero());
        assert_eq!(o0.value(&set(3, &[1])), ExtValue::Infinite);
        let o3 = size_constrained_modular(&ws(&[1, 2, 4]), 3).unwrap();
        assert_eq!(o3.domain(100).unwrap().len(), 1);
        assert!(size_constrained_modular(&ws(&[1]), 2).is_err());
    }

    #[test]
    fn dual_examples() {
        let o = from_matroid_and_weights(&make_uniform(2, 1).unwrap(), &ws(&[1, 3])).unwrap();
        let d = dual_valuation(&o);
        assert_eq!(d.value(&set(2, &[0])), ExtValue::int(3));
        assert_eq!(d.rank(), 1);
        let dd = dual_valuation(&d);
        for x in crate::primitives::all_subsets(2) {
            assert_eq!(dd.value(&x), o.value(&x));
        }
    }

    #[test]
    fn disjoint_sum_examples() {
        let delta = from_matroid_and_weights(&make_uniform(2, 1).unwrap(), &ws(&[0, 0])).unwrap();
        let s = disjoint_sum(&[delta.clone(), delta.clone()]).unwrap();
        assert_eq!(s.rank(), 2);
        assert_eq!(
            s.value(&Subset::concat(&[set(2, &[0]), set(2, &[1])])),
            ExtValue::zero()
        );
        assert_eq!(
            s.value(&Subset::concat(&[set(2, &[0, 1]), set(2, &[])])),
            ExtValue::Infinite
        );
        let one = disjoint_sum(std::slice::from_ref(&delta)).unwrap();
        for x in crate::primitives::all_subsets(2) {
            assert_eq!(one.value(&x), delta.value(&x));
        }
    }

    #[test]
    fn intersection_constraint_examples() {
        let rank0 = make_uniform(2, 0).unwrap();
        let o = intersection_constraint_valuation(2, &rank0, 2).unwrap();
        assert!(o.value(&Subset::concat(&[set(2, &[0]), set(2, &[1])])).is_finite());
        assert_eq!(
            o.value(&Subset::concat(&[set(2, &[0]), set(2, &[0])])),
            ExtValue::Infinite
        );

        let free = intersection_constraint_valuation(2, &make_free(3), 4).unwrap();
        assert_eq!(free.domain(1000).unwrap().len(), binomial(6, 4) as usize);

        let u13 = make_uniform(3, 1).unwrap();
        let o = intersection_constraint_valuation(2, &u13, 4).unwrap();
        assert!(o
            .value(&Subset::concat(&[set(3, &[0, 1]), set(3, &[0, 2])]))
            .is_finite());
        assert_eq!(
            o.value(&Subset::concat(&[set(3, &[0, 1]), set(3, &[0, 1])])),
            ExtValue::Infinite
        );

        assert!(matches!(
            intersection_constraint_valuation(2, &rank0, 3),
            Err(Error::EmptyDomain(_))
        ));
    }

    #[test]
    fn intersection_constraint_support_is_a_matroid() {
        let g = make_graphic(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        for r in 0..=6 {
            let Ok(o) = intersection_constraint_valuation(2, &g, r) else {
                continue;
            };
            let bases: Vec<Subset> = o.domain(1000).unwrap().into_iter().map(|(x, _)| x).collect();
            let fam = ExplicitBaseFamily::new(6, bases).unwrap();
            assert!(check_base_exchange(&fam).unwrap(), "r = {r}");
        }
    }

    #[test]
    fn laminar_penalty_examples() {
        let w = vec![rat(2), rat(0)];
        let p = laminar_penalty(&w, 3, 3).unwrap();
        let x = Subset::concat(&[set(2, &[0]), set(2, &[0]), set(2, &[0])]);
        assert_eq!(p.value(&x), ExtValue::int(2));
        let q = laminar_penalty(&ws(&[5, 9]), 2, 2).unwrap();
        assert_eq!(
            q.value(&Subset::concat(&[set(2, &[0]), set(2, &[1])])),
            ExtValue::zero()
        );
        assert_eq!(
            q.value(&Subset::concat(&[set(2, &[0]), set(2, &[])])),
            ExtValue::Infinite
        );
        assert!(laminar_penalty(&[rat(1), rat(-1)], 2, 2).is_err());
    }

    #[test]
    fn laminar_penalty_matches_intersection_weight() {
        let w = vec![rat(3), ratio(1, 2), rat(0)];
        let p = laminar_penalty(&w, 2, 3).unwrap();
        for (x, v) in p.domain(1000).unwrap() {
            let cap = stacked_intersection(&x, 2, 3);
            assert_eq!(v, modular_sum(&w, &cap));
        }
    }

    #[test]
    fn exchange_checks() {
        let o = from_matroid_and_weights(&make_uniform(4, 2).unwrap(), &ws(&[3, -1, 4, 1])).unwrap();
        assert!(check_valuated_exchange(&o).unwrap());
        let p = laminar_penalty(&ws(&[2, 1]), 2, 2).unwrap();
        assert!(check_valuated_exchange(&p).unwrap());
        let bad = indicator(4, &[set(4, &[0, 1]), set(4, &[2, 3])]).unwrap();
        assert!(!check_valuated_exchange(&bad).unwrap());
        assert!(check_valuated_exchange(&dual_valuation(&o)).unwrap());
        let neg = laminar_penalty_unchecked(&ws(&[-1, 0]), 2, 2).unwrap();
        assert!(!check_valuated_exchange(&neg).unwrap());
    }

    #[test]
    fn memo_counts_and_is_deterministic() {
        let o = size_constrained_modular(&ws(&[1, 2, 3]), 1).unwrap();
        let x = set(3, &[2]);
        let a = o.value(&x);
        let b = o.value(&x);
        assert_eq!(a, b);
        assert_eq!(o.query_count(), 2);
        assert_eq!(o.evaluation_count(), 1);
    }
}
