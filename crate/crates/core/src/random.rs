//! Random small instances for equivalence testing and the CLI generator.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::matroid::{dual_matroid, make_graphic, make_linear, make_partition, make_uniform, MatroidOracle};
use crate::primitives::{rat, ratio, Rational, Subset};
use crate::valuated::{
    from_matroid_and_weights, laminar_convex_function, restrict_to_hyperplane, LaminarSpec, MnatFunction, Restricted,
    UnivariateTable, ValuationOracle,
};

/// A rational `p/q` in `[lo, hi]` with `q ∈ {1, 2, 3, 4}`.
pub fn random_rational<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> Rational {
    let q = rng.gen_range(1..=4);
    ratio(rng.gen_range(lo * q..=hi * q), q)
}

pub fn random_weights<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> Vec<Rational> {
    (0..n).map(|_| random_rational(rng, lo, hi)).collect()
}

/// Small integers in `[lo, hi]`; collisions make ties likely.
pub fn random_int_weights<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> Vec<Rational> {
    (0..n).map(|_| rat(rng.gen_range(lo..=hi))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatroidKind {
    Uniform,
    Partition,
    Graphic,
    Linear,
    DualGraphic,
}

pub const ALL_KINDS: [MatroidKind; 5] = [
    MatroidKind::Uniform,
    MatroidKind::Partition,
    MatroidKind::Graphic,
    MatroidKind::Linear,
    MatroidKind::DualGraphic,
];

/// A random partition of `0..n` into nonempty blocks.
pub fn random_blocks<R: Rng>(rng: &mut R, n: usize) -> Vec<Subset> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut blocks = Vec::new();
    let mut cur = Vec::new();
    for v in order {
        cur.push(v);
        if rng.gen_bool(0.4) {
            blocks.push(Subset::from_indices(n, cur.drain(..)));
        }
    }
    if !cur.is_empty() {
        blocks.push(Subset::from_indices(n, cur));
    }
    blocks
}

/// A random matroid of the given kind with rank at most `max_rank`.
pub fn random_matroid_of<R: Rng>(rng: &mut R, kind: MatroidKind, n: usize, max_rank: usize) -> Result<MatroidOracle> {
    let max_rank = max_rank.min(n);
    match kind {
        MatroidKind::Uniform => make_uniform(n, rng.gen_range(0..=max_rank)),
        MatroidKind::Partition => {
            let mut budget = rng.gen_range(0..=max_rank);
            let blocks: Vec<(Subset, usize)> = random_blocks(rng, n)
                .into_iter()
                .map(|b| {
                    let cap = rng.gen_range(0..=b.len().min(budget));
                    budget -= cap;
                    (b, cap)
                })
                .collect();
            make_partition(n, &blocks)
        }
        MatroidKind::Graphic => {
            let vertices = rng.gen_range(1..=max_rank + 1);
            let edges: Vec<(usize, usize)> = (0..n)
                .map(|_| (rng.gen_range(0..vertices), rng.gen_range(0..vertices)))
                .collect();
            make_graphic(vertices, &edges)
        }
        MatroidKind::Linear => {
            let dim = rng.gen_range(1..=max_rank.max(1));
            let cols: Vec<Vec<Rational>> = (0..n)
                .map(|_| (0..dim).map(|_| rat(rng.gen_range(-1..=1))).collect())
                .collect();
            let m = make_linear(&cols)?;
            if m.rank() > max_rank {
                return make_uniform(n, max_rank);
            }
            Ok(m)
        }
        MatroidKind::DualGraphic => {
            // Cographic matroids of a random graph; fall back when too big.
            let vertices = rng.gen_range(1..=n.max(1));
            let edges: Vec<(usize, usize)> = (0..n)
                .map(|_| (rng.gen_range(0..vertices), rng.gen_range(0..vertices)))
                .collect();
            let d = dual_matroid(&make_graphic(vertices, &edges)?);
            if d.rank() > max_rank {
                return make_uniform(n, rng.gen_range(0..=max_rank));
            }
            Ok(d)
        }
    }
}

pub fn random_matroid<R: Rng>(rng: &mut R, n: usize, max_rank: usize) -> Result<MatroidOracle> {
    let kind = *ALL_KINDS.choose(rng).expect("nonempty");
    random_matroid_of(rng, kind, n, max_rank)
}

/// A convex table on `[0, len - 1]` with small integer steps.
pub fn random_convex_table<R: Rng>(rng: &mut R, len: usize, spread: i64) -> UnivariateTable {
    let mut values = vec![rat(rng.gen_range(-spread..=spread))];
    let mut step = rat(rng.gen_range(-spread..=spread));
    for _ in 1..len {
        let next = values.last().expect("nonempty") + &step;
        values.push(next);
        step += rat(rng.gen_range(0..=spread));
    }
    UnivariateTable::new(0, values).expect("increasing steps are convex")
}

/// A random laminar family on `0..n` built by recursive splitting.
pub fn random_laminar_family<R: Rng>(rng: &mut R, n: usize) -> Vec<Subset> {
    fn split<R: Rng>(rng: &mut R, n: usize, elems: Vec<usize>, out: &mut Vec<Subset>) {
        if elems.is_empty() {
            return;
        }
        if rng.gen_bool(0.6) {
            out.push(Subset::from_indices(n, elems.iter().copied()));
        }
        if elems.len() == 1 {
            return;
        }
        let cut = rng.gen_range(1..elems.len());
        let right = elems[cut..].to_vec();
        split(rng, n, elems[..cut].to_vec(), out);
        split(rng, n, right, out);
    }
    let mut out = Vec::new();
    let mut elems: Vec<usize> = (0..n).collect();
    elems.shuffle(rng);
    split(rng, n, elems, &mut out);
    out
}

/// A non-modular valuated matroid: a random laminar convex function on
/// `{0,1}^n` restricted to `Σx = r`.
pub fn random_laminar_valuation<R: Rng>(rng: &mut R, n: usize, r: usize) -> Result<ValuationOracle> {
    let members = random_laminar_family(rng, n)
        .into_iter()
        .map(|m| {
            let len = m.len() + 1;
            (m, random_convex_table(rng, len, 3))
        })
        .collect();
    let spec = LaminarSpec::new(members, vec![0; n], vec![1; n])?;
    match restrict_to_hyperplane(&laminar_convex_function(&spec)?, r as i64)? {
        Restricted::Valuation(o) => Ok(o),
        Restricted::Function(_) => unreachable!("0/1 box restricts to a set function"),
    }
}

/// A random laminar convex function on `[0, cap]^n`.
pub fn random_laminar_function<R: Rng>(rng: &mut R, n: usize, cap: i64) -> Result<MnatFunction> {
    let members = random_laminar_family(rng, n)
        .into_iter()
        .map(|m| {
            let len = m.len() * cap as usize + 1;
            (m, random_convex_table(rng, len, 3))
        })
        .collect();
    laminar_convex_function(&LaminarSpec::new(members, vec![0; n], vec![cap; n])?)
}

/// A random M-convex function with domain in `[0, cap]^n ∩ {Σx = r}`;
/// requires `cap ≥ 2` and `0 ≤ r ≤ cap * n`.
pub fn random_m_convex<R: Rng>(rng: &mut R, n: usize, cap: i64, r: i64) -> Result<MnatFunction> {
    match restrict_to_hyperplane(&random_laminar_function(rng, n, cap)?, r)? {
        Restricted::Function(f) => Ok(f),
        Restricted::Valuation(_) => crate::error::invalid("box must not be 0/1"),
    }
}

/// Modular weights on a random matroid, or occasionally a laminar one.
pub fn random_valuation<R: Rng>(rng: &mut R, n: usize, max_rank: usize) -> Result<ValuationOracle> {
    if rng.gen_bool(0.2) {
        let r = rng.gen_range(0..=max_rank.min(n));
        return random_laminar_valuation(rng, n, r);
    }
    let m = random_matroid(rng, n, max_rank)?;
    let w = if rng.gen_bool(0.5) {
        random_int_weights(rng, n, -3, 3)
    } else {
        random_weights(rng, n, -10, 10)
    };
    from_matroid_and_weights(&m, &w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroid::check_matroid_axioms;
    use crate::valuated::check_valuated_exchange;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_matroids_are_matroids() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..100 {
            let kind = ALL_KINDS[i % ALL_KINDS.len()];
            let n = rng.gen_range(1..=7);
            let m = random_matroid_of(&mut rng, kind, n, 4).unwrap();
            assert!(m.rank() <= 4);
            assert!(check_matroid_axioms(&m).unwrap(), "{kind:?}");
        }
    }

    #[test]
    fn generated_valuations_are_valuated() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.gen_range(1..=6);
            let o = random_valuation(&mut rng, n, 4).unwrap();
            assert!(check_valuated_exchange(&o).unwrap(), "{o:?}");
        }
    }

    #[test]
    fn laminar_family_is_laminar() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let fam = random_laminar_family(&mut rng, 6);
            for a in &fam {
                for b in &fam {
                    assert!(a.is_subset(b) || b.is_subset(a) || a.intersection(b).is_empty());
                }
            }
        }
    }
}
