//! M♮-convex functions on integer boxes, laminar convex functions and
//! restriction to a coordinate-sum hyperplane.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;

use super::ValuationOracle;
use crate::error::{invalid, Error, Result};
use crate::primitives::{box_points, box_volume, ExtValue, IntVector, Rational, Subset, MAX_GROUND};

/// Box volume allowed for witness searches and exhaustive checks.
pub const BOX_SCAN_LIMIT: u128 = 1_000_000;

type PointFn = dyn Fn(&IntVector) -> ExtValue + Send + Sync;

/// A function `Z^n -> Q ∪ {+inf}` whose finite values lie in `[lower, upper]`.
#[derive(Clone)]
pub struct MnatFunction {
    lower: Vec<i64>,
    upper: Vec<i64>,
    witness: IntVector,
    eval: Arc<PointFn>,
}

impl fmt::Debug for MnatFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MnatFunction")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("witness", &self.witness)
            .finish()
    }
}

impl MnatFunction {
    /// Wraps `eval`; points outside the box are `+inf` without calling it.
    pub fn from_fn(
        lower: Vec<i64>,
        upper: Vec<i64>,
        witness: IntVector,
        eval: impl Fn(&IntVector) -> ExtValue + Send + Sync + 'static,
    ) -> Result<Self> {
        if lower.len() != upper.len() || witness.len() != lower.len() {
            return invalid("box bounds and witness must share one dimension");
        }
        let f = MnatFunction {
            lower,
            upper,
            witness,
            eval: Arc::new(eval),
        };
        if !f.value(&f.witness).is_finite() {
            return Err(Error::EmptyDomain("witness point is not in the domain".into()));
        }
        Ok(f)
    }

    /// Like [`from_fn`](Self::from_fn) but finds a witness by scanning the box.
    pub fn from_fn_search(
        lower: Vec<i64>,
        upper: Vec<i64>,
        eval: impl Fn(&IntVector) -> ExtValue + Send + Sync + 'static,
    ) -> Result<Self> {
        if lower.len() != upper.len() {
            return invalid("box bounds differ in dimension");
        }
        let volume = box_volume(&lower, &upper);
        if volume > BOX_SCAN_LIMIT {
            return Err(Error::ResourceLimit(format!("witness search over {volume} box points")));
        }
        let witness = box_points(&lower, &upper)
            .find(|x| eval(x).is_finite())
            .ok_or_else(|| Error::EmptyDomain("no finite point in the box".into()))?;
        Self::from_fn(lower, upper, witness, eval)
    }

    /// Explicit finite values; all other points are `+inf`.
    pub fn from_table(entries: &[(IntVector, Rational)]) -> Result<Self> {
        let Some((first, _)) = entries.first() else {
            return Err(Error::EmptyDomain("table has no finite entries".into()));
        };
        let n = first.len();
        if entries.iter().any(|(x, _)| x.len() != n) {
            return invalid("table points differ in dimension");
        }
        let lower = (0..n)
            .map(|i| entries.iter().map(|(x, _)| x.0[i]).min().unwrap())
            .collect();
        let upper = (0..n)
            .map(|i| entries.iter().map(|(x, _)| x.0[i]).max().unwrap())
            .collect();
        let table: HashMap<IntVector, Rational> = entries.iter().cloned().collect();
        Self::from_fn(lower, upper, first.clone(), move |x| {
            table.get(x).cloned().map_or(ExtValue::Infinite, ExtValue::Finite)
        })
    }

    /// `Σ w(v) x(v)` on the box.
    pub fn modular(w: &[Rational], lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        if w.len() != lower.len() || lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return invalid("modular function: bad box or weight length");
        }
        let w = w.to_vec();
        let witness = IntVector(lower.clone());
        Self::from_fn(lower, upper, witness, move |x| {
            ExtValue::Finite(
                w.iter()
                    .zip(&x.0)
                    .map(|(wi, &xi)| wi * Rational::from_integer(xi.into()))
                    .sum(),
            )
        })
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[i64] {
        &self.lower
    }

    pub fn upper(&self) -> &[i64] {
        &self.upper
    }

    pub fn witness_point(&self) -> &IntVector {
        &self.witness
    }

    pub fn in_box(&self, x: &IntVector) -> bool {
        x.len() == self.dimension()
            && x.0
                .iter()
                .zip(&self.lower)
                .zip(&self.upper)
                .all(|((v, l), u)| l <= v && v <= u)
    }

    pub fn value(&self, x: &IntVector) -> ExtValue {
        if !self.in_box(x) {
            return ExtValue::Infinite;
        }
        (self.eval)(x)
    }

    pub fn box_volume(&self) -> u128 {
        box_volume(&self.lower, &self.upper)
    }

    /// Finite points with their values, scanning the whole box.
    pub fn domain(&self, limit: u128) -> Result<Vec<(IntVector, Rational)>> {
        let volume = self.box_volume();
        if volume > limit {
            return Err(Error::ResourceLimit(format!(
                "box of {volume} points exceeds limit {limit}"
            )));
        }
        Ok(box_points(&self.lower, &self.upper)
            .filter_map(|x| self.value(&x).into_finite().map(|v| (x, v)))
            .collect())
    }
}

/// A convex univariate table on `[start, start + len - 1]`, `+inf` outside.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariateTable {
    start: i64,
    values: Vec<Rational>,
}

impl UnivariateTable {
    pub fn new(start: i64, values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return invalid("univariate table must cover at least one point");
        }
        let convex = values.windows(3).all(|w| &w[0] + &w[2] >= &w[1] + &w[1]);
        if !convex {
            return invalid("univariate table is not discretely convex");
        }
        Ok(UnivariateTable { start, values })
    }

    pub fn from_fn(start: i64, end: i64, f: impl Fn(i64) -> Rational) -> Result<Self> {
        if end < start {
            return invalid("univariate table interval is empty");
        }
        Self::new(start, (start..=end).map(f).collect())
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn eval(&self, k: i64) -> ExtValue {
        if k < self.start || k > self.end() {
            return ExtValue::Infinite;
        }
        ExtValue::Finite(self.values[(k - self.start) as usize].clone())
    }
}

/// A laminar family with one convex table per member, plus the box that
/// encloses the domain. The box acts as extra singleton members, so it
/// keeps the function laminar convex.
#[derive(Clone, Debug)]
pub struct LaminarSpec {
    pub members: Vec<(Subset, UnivariateTable)>,
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
}

impl LaminarSpec {
    pub fn new(members: Vec<(Subset, UnivariateTable)>, lower: Vec<i64>, upper: Vec<i64>) -> Result<Self> {
        let spec = LaminarSpec { members, lower, upper };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension();
        if self.upper.len() != n || n > MAX_GROUND {
            return invalid("laminar spec: box bounds differ in dimension");
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| l > u) {
            return invalid("laminar spec: empty box");
        }
        for (i, (a, _)) in self.members.iter().enumerate() {
            if a.ground_size() != n {
                return invalid("laminar spec: member over the wrong ground set");
            }
            for (b, _) in &self.members[i + 1..] {
                let nested = a.is_subset(b) || b.is_subset(a);
                if !nested && !a.intersection(b).is_empty() {
                    return invalid(format!("family is not laminar: {a:?} and {b:?} cross"));
                }
            }
        }
        Ok(())
    }

    /// `Σ_X g_X(x(X))` ignoring the box.
    pub fn raw_value(&self, x: &IntVector) -> ExtValue {
        let mut total = ExtValue::zero();
        for (member, table) in &self.members {
            let s: i64 = member.iter().map(|v| x.0[v]).sum();
            total += table.eval(s);
            if !total.is_finite() {
                break;
            }
        }
        total
    }
}

/// The laminar convex function of `spec`, restricted to its box.
pub fn laminar_convex_function(spec: &LaminarSpec) -> Result<MnatFunction> {
    spec.validate()?;
    let s = spec.clone();
    MnatFunction::from_fn_search(spec.lower.clone(), spec.upper.clone(), move |x| s.raw_value(x))
}

/// Result of [`restrict_to_hyperplane`]: 0/1 boxes become set functions.
#[derive(Clone, Debug)]
pub enum Restricted {
    Valuation(ValuationOracle),
    Function(MnatFunction),
}

/// `f` on `{x : Σx = r}`, `+inf` elsewhere.
pub fn restrict_to_hyperplane(f: &MnatFunction, r: i64) -> Result<Restricted> {
    let n = f.dimension();
    let zero_one = f.lower.iter().all(|&l| l >= 0) && f.upper.iter().all(|&u| u <= 1);
    let volume = f.box_volume();
    if volume > BOX_SCAN_LIMIT {
        return Err(Error::ResourceLimit(format!("witness search over {volume} box points")));
    }
    let witness = box_points(&f.lower, &f.upper)
        .find(|x| x.sum() == r && f.value(x).is_finite())
        .ok_or_else(|| Error::EmptyDomain(format!("no finite point with coordinate sum {r}")))?;
    let g = f.clone();
    if zero_one {
        let base = Subset::from_indices(n, (0..n).filter(|&i| witness.0[i] == 1));
        let oracle = ValuationOracle::from_fn(n, r as usize, base, "hyperplane-restriction", move |x| {
            g.value(&x.to_vector())
        })?;
        Ok(Restricted::Valuation(oracle))
    } else {
        let h = MnatFunction::from_fn(f.lower.clone(), f.upper.clone(), witness, move |x| {
            if x.sum() == r {
                g.value(x)
            } else {
                ExtValue::Infinite
            }
        })?;
        Ok(Restricted::Function(h))
    }
}

/// Exhaustive M♮ exchange check over the box.
pub fn check_mnat_exchange(f: &MnatFunction) -> Result<bool> {
    check_mnat_exchange_with_limit(f, BOX_SCAN_LIMIT)
}

pub fn check_mnat_exchange_with_limit(f: &MnatFunction, limit: u128) -> Result<bool> {
    let dom = f.domain(limit)?;
    let values: HashMap<&IntVector, &Rational> = dom.iter().map(|(x, v)| (x, v)).collect();
    let at = |x: &IntVector| values.get(x).copied();
    let n = f.dimension();
    for (x, fx) in &dom {
        for (y, fy) in &dom {
            let lhs = fx + fy;
            let holds = |x2: IntVector, y2: IntVector| match (at(&x2), at(&y2)) {
                (Some(a), Some(b)) => lhs >= a + b,
                _ => false,
            };
            for v in (0..n).filter(|&v| x.0[v] > y.0[v]) {
                let ok = holds(x.bumped(v, -1), y.bumped(v, 1))
                    || (0..n)
                        .filter(|&u| x.0[u] < y.0[u])
                        .any(|u| holds(x.moved(v, u), y.moved(u, v)));
                if !ok {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Convenience: `Σ_v g(x_v)` with one shared table per coordinate.
pub fn separable(tables: Vec<UnivariateTable>) -> Result<LaminarSpec> {
    let n = tables.len();
    let lower = tables.iter().map(|t| t.start()).collect();
    let upper = tables.iter().map(|t| t.end()).collect();
    let members = tables
        .into_iter()
        .enumerate()
        .map(|(v, t)| (Subset::from_indices(n, [v]), t))
        .collect();
    LaminarSpec::new(members, lower, upper)
}

impl Default for UnivariateTable {
    fn default() -> Self {
        UnivariateTable {
            start: 0,
            values: vec![Rational::zero()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::{rat, Subset};
    use crate::valuated::check_valuated_exchange;
    use proptest::prelude::*;

    fn squares(hi: i64) -> UnivariateTable {
        UnivariateTable::from_fn(0, hi, |j| rat(j * j)).unwrap()
    }

    #[test]
    fn laminar_examples() {
        let f = laminar_convex_function(&separable(vec![squares(3), squares(3)]).unwrap()).unwrap();
        assert_eq!(f.value(&IntVector(vec![1, 2])), ExtValue::int(5));
        let empty = LaminarSpec::new(vec![], vec![0, 0], vec![2, 2]).unwrap();
        let z = laminar_convex_function(&empty).unwrap();
        assert!(z.domain(100).unwrap().iter().all(|(_, v)| v.is_zero()));
        let unit = laminar_convex_function(&separable(vec![squares(1), squares(1)]).unwrap()).unwrap();
        assert_eq!(unit.value(&IntVector(vec![2, 0])), ExtValue::Infinite);
    }

    #[test]
    fn rejects_crossing_family_and_concave_table() {
        let a = Subset::from_indices(3, [0, 1]);
        let b = Subset::from_indices(3, [1, 2]);
        let t = squares(2);
        assert!(LaminarSpec::new(vec![(a, t.clone()), (b, t)], vec![0; 3], vec![1; 3]).is_err());
        assert!(UnivariateTable::new(0, vec![rat(0), rat(2), rat(3)]).is_err());
    }

    #[test]
    fn restriction_examples() {
        let zero = MnatFunction::modular(&vec![rat(0); 3], vec![0; 3], vec![1; 3]).unwrap();
        let Restricted::Valuation(o) = restrict_to_hyperplane(&zero, 2).unwrap() else {
            panic!()
        };
        let dom = o.domain(100).unwrap();
        assert_eq!(dom.len(), 3);
        assert!(dom.iter().all(|(x, _)| x.len() == 2));
        assert!(matches!(restrict_to_hyperplane(&zero, 4), Err(Error::EmptyDomain(_))));

        let sq = laminar_convex_function(&separable(vec![squares(2), squares(2)]).unwrap()).unwrap();
        let Restricted::Function(h) = restrict_to_hyperplane(&sq, 2).unwrap() else {
            panic!()
        };
        assert_eq!(h.value(&IntVector(vec![1, 1])), ExtValue::int(2));
        assert_eq!(h.value(&IntVector(vec![2, 0])), ExtValue::int(4));
        assert_eq!(h.value(&IntVector(vec![1, 0])), ExtValue::Infinite);
    }

    #[test]
    fn mnat_exchange_examples() {
        let bad =
            MnatFunction::from_table(&[(IntVector(vec![0, 0]), rat(0)), (IntVector(vec![1, 1]), rat(0))]).unwrap();
        assert!(!check_mnat_exchange(&bad).unwrap());
        let m = MnatFunction::modular(&[rat(3), rat(-2), rat(1)], vec![-1, 0, 0], vec![1, 2, 1]).unwrap();
        assert!(check_mnat_exchange(&m).unwrap());
    }

    #[test]
    fn nested_laminar_restriction_is_valuated() {
        let n = 4;
        let members = vec![
            (
                Subset::from_indices(n, [0, 1, 2]),
                UnivariateTable::from_fn(0, 3, |j| rat((j - 1) * (j - 1))).unwrap(),
            ),
            (
                Subset::from_indices(n, [0, 1]),
                UnivariateTable::from_fn(0, 2, |j| rat(3 * j)).unwrap(),
            ),
            (
                Subset::from_indices(n, [3]),
                UnivariateTable::from_fn(0, 1, |j| rat(-j)).unwrap(),
            ),
        ];
        let f = laminar_convex_function(&LaminarSpec::new(members, vec![0; n], vec![1; n]).unwrap()).unwrap();
        assert!(check_mnat_exchange(&f).unwrap());
        for r in 0..=4 {
            if let Ok(Restricted::Valuation(o)) = restrict_to_hyperplane(&f, r) {
                assert!(check_valuated_exchange(&o).unwrap());
            }
        }
    }

    fn convex_table() -> impl Strategy<Value = UnivariateTable> {
        (-2i64..=1, prop::collection::vec(0i64..4, 0..4), -3i64..3, -5i64..5).prop_map(|(start, incs, slope, base)| {
            let mut values = vec![rat(base)];
            let mut step = slope;
            for inc in incs {
                step += inc;
                let last = values.last().unwrap().clone();
                values.push(last + rat(step));
            }
            UnivariateTable::new(start, values).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn separable_convex_is_mnat(tables in prop::collection::vec(convex_table(), 1..4)) {
            let f = laminar_convex_function(&separable(tables).unwrap()).unwrap();
            prop_assert!(check_mnat_exchange(&f).unwrap());
        }
    }
}
