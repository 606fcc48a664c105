//! Matroids given by independence oracles, the standard constructions and
//! exhaustive axiom checks.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::primitives::{all_subsets, k_subsets, Rational, Subset};

/// Largest ground set [`MatroidOracle::enumerate_bases`] will scan by default.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 24;

type IndependenceFn = dyn Fn(&Subset) -> bool + Send + Sync;

/// A matroid `(V, I)` given by its independence oracle.
///
/// The rank is computed once by greedy augmentation from the empty set.
#[derive(Clone)]
pub struct MatroidOracle {
    ground: usize,
    rank: usize,
    kind: &'static str,
    independent: Arc<IndependenceFn>,
}

impl fmt::Debug for MatroidOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatroidOracle")
            .field("kind", &self.kind)
            .field("ground", &self.ground)
            .field("rank", &self.rank)
            .finish()
    }
}

impl MatroidOracle {
    /// Wraps an arbitrary independence predicate. The caller is
    /// responsible for it being a matroid; see [`check_matroid_axioms`].
    pub fn from_fn(
        ground: usize,
        kind: &'static str,
        independent: impl Fn(&Subset) -> bool + Send + Sync + 'static,
    ) -> Self {
        let independent: Arc<IndependenceFn> = Arc::new(independent);
        let rank = greedy_rank(ground, &*independent, &Subset::full(ground));
        MatroidOracle {
            ground,
            rank,
            kind,
            independent,
        }
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn kind(&self) -> &'static str {
        self.kind
    }

    pub fn is_independent(&self, x: &Subset) -> bool {
        (self.independent)(x)
    }

    pub fn is_base(&self, x: &Subset) -> bool {
        x.len() == self.rank && self.is_independent(x)
    }

    /// Rank of an arbitrary subset.
    pub fn rank_of(&self, x: &Subset) -> usize {
        greedy_rank(self.ground, &*self.independent, x)
    }

    /// One base, greedily built in index order.
    pub fn some_base(&self) -> Subset {
        greedy_max_independent(self.ground, &*self.independent, &Subset::full(self.ground))
    }

    pub fn enumerate_bases(&self) -> Result<Vec<Subset>> {
        self.enumerate_bases_with_limit(DEFAULT_ENUMERATION_LIMIT)
    }

    /// All bases in lexicographic order, scanning every `rank`-subset.
    pub fn enumerate_bases_with_limit(&self, max_ground: usize) -> Result<Vec<Subset>> {
        if self.ground > max_ground {
            return Err(Error::ResourceLimit(format!(
                "base enumeration over |V| = {} exceeds limit {max_ground}",
                self.ground
            )));
        }
        Ok(k_subsets(self.ground, self.rank)
            .filter(|x| self.is_independent(x))
            .collect())
    }
}

fn greedy_max_independent(ground: usize, independent: &IndependenceFn, within: &Subset) -> Subset {
    let mut x = Subset::empty(ground);
    for i in within.iter() {
        let y = x.with(i);
        if independent(&y) {
            x = y;
        }
    }
    x
}

fn greedy_rank(ground: usize, independent: &IndependenceFn, within: &Subset) -> usize {
    greedy_max_independent(ground, independent, within).len()
}

pub fn make_uniform(ground: usize, r: usize) -> Result<MatroidOracle> {
    if r > ground {
        return invalid(format!("uniform rank {r} exceeds ground size {ground}"));
    }
    Ok(MatroidOracle::from_fn(ground, "uniform", move |x| x.len() <= r))
}

/// The free matroid: every subset is independent.
pub fn make_free(ground: usize) -> MatroidOracle {
    MatroidOracle::from_fn(ground, "free", |_| true)
}

pub fn make_partition(ground: usize, blocks: &[(Subset, usize)]) -> Result<MatroidOracle> {
    let mut seen = Subset::empty(ground);
    for (block, _) in blocks {
        if block.ground_size() != ground {
            return invalid("partition block over a different ground set");
        }
        if !block.intersection(&seen).is_empty() {
            return invalid("partition blocks overlap");
        }
        seen = seen.union(block);
    }
    if seen != Subset::full(ground) {
        return invalid("partition blocks do not cover the ground set");
    }
    let blocks = blocks.to_vec();
    Ok(MatroidOracle::from_fn(ground, "partition", move |x| {
        blocks.iter().all(|(b, cap)| x.intersection(b).len() <= *cap)
    }))
}

/// Cycle matroid of a multigraph; the ground set is the edge list.
pub fn make_graphic(vertices: usize, edges: &[(usize, usize)]) -> Result<MatroidOracle> {
    if let Some(&(u, v)) = edges.iter().find(|(u, v)| *u >= vertices || *v >= vertices) {
        return invalid(format!("edge ({u}, {v}) references a vertex outside 0..{vertices}"));
    }
    if edges.is_empty() {
        return invalid("graphic matroid needs at least one edge");
    }
    let edges = edges.to_vec();
    let m = edges.len();
    Ok(MatroidOracle::from_fn(m, "graphic", move |x| {
        let mut parent: Vec<usize> = (0..vertices).collect();
        fn find(parent: &mut [usize], mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        for e in x.iter() {
            let (u, v) = edges[e];
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return false;
            }
            parent[ru] = rv;
        }
        true
    }))
}

/// Column matroid of a rational matrix given as a list of columns.
pub fn make_linear(columns: &[Vec<Rational>]) -> Result<MatroidOracle> {
    if columns.is_empty() {
        return invalid("linear matroid needs at least one column");
    }
    let rows = columns[0].len();
    if columns.iter().any(|c| c.len() != rows) {
        return invalid("linear matroid columns have different lengths");
    }
    let columns = columns.to_vec();
    Ok(MatroidOracle::from_fn(columns.len(), "linear", move |x| {
        let picked: Vec<Vec<Rational>> = x.iter().map(|i| columns[i].clone()).collect();
        column_rank(picked, rows) == x.len()
    }))
}

fn column_rank(mut cols: Vec<Vec<Rational>>, rows: usize) -> usize {
    // Gaussian elimination on the transposed matrix (columns as rows).
    let mut rank = 0;
    for pivot_col in 0..rows {
        let Some(p) = (rank..cols.len()).find(|&i| !cols[i][pivot_col].is_zero()) else {
            continue;
        };
        cols.swap(rank, p);
        let inv = Rational::one() / &cols[rank][pivot_col];
        let pivot_row = cols[rank].clone();
        for row in cols.iter_mut().skip(rank + 1) {
            if row[pivot_col].is_zero() {
                continue;
            }
            let factor = &row[pivot_col] * &inv;
            for (a, b) in row.iter_mut().zip(&pivot_row) {
                *a -= &factor * b;
            }
        }
        rank += 1;
        if rank == cols.len() {
            break;
        }
    }
    rank
}

/// Matroid whose independent sets are the subsets of the listed bases.
pub fn make_from_bases(family: &ExplicitBaseFamily) -> Result<MatroidOracle> {
    if !check_base_exchange(family)? {
        return invalid("explicit base family violates the base exchange axiom");
    }
    let bases = family.bases.clone();
    Ok(MatroidOracle::from_fn(family.ground, "explicit", move |x| {
        bases.iter().any(|b| x.is_subset(b))
    }))
}

/// Dual matroid: `X` is independent iff `V \ X` still spans.
pub fn dual_matroid(m: &MatroidOracle) -> MatroidOracle {
    let inner = m.clone();
    let n = m.ground_size();
    MatroidOracle::from_fn(n, "dual", move |x| inner.rank_of(&x.complement()) == inner.rank())
}

/// A base family listed explicitly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitBaseFamily {
    pub ground: usize,
    pub bases: Vec<Subset>,
}

impl ExplicitBaseFamily {
    pub fn new(ground: usize, mut bases: Vec<Subset>) -> Result<Self> {
        if bases.iter().any(|b| b.ground_size() != ground) {
            return invalid("base over a different ground set");
        }
        bases.sort();
        bases.dedup();
        Ok(ExplicitBaseFamily { ground, bases })
    }
}

/// Exhaustive check of the base exchange axiom: for all `X, Y` and
/// `v in X \ Y` some `u in Y \ X` has `X - v + u` in the family.
pub fn check_base_exchange(family: &ExplicitBaseFamily) -> Result<bool> {
    let Some(first) = family.bases.first() else {
        return invalid("empty base family");
    };
    if family.bases.iter().any(|b| b.len() != first.len()) {
        return invalid("bases are not equicardinal");
    }
    let members: std::collections::HashSet<Subset> = family.bases.iter().copied().collect();
    for x in &family.bases {
        for y in &family.bases {
            for v in x.difference(y).iter() {
                let ok = y.difference(x).iter().any(|u| members.contains(&x.exchange(v, u)));
                if !ok {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Exhaustive independence axioms: empty set, downward closure, augmentation.
pub fn check_matroid_axioms(m: &MatroidOracle) -> Result<bool> {
    let n = m.ground_size();
    if n > 12 {
        return Err(Error::ResourceLimit(format!("axiom check over |V| = {n} exceeds 12")));
    }
    if !m.is_independent(&Subset::empty(n)) {
        return Ok(false);
    }
    let indep: Vec<Subset> = all_subsets(n).filter(|x| m.is_independent(x)).collect();
    for x in &indep {
        if x.iter().any(|i| !m.is_independent(&x.without(i))) {
            return Ok(false);
        }
    }
    for x in &indep {
        for y in &indep {
            if x.len() < y.len() && !y.difference(x).iter().any(|u| m.is_independent(&x.with(u))) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
