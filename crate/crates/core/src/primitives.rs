//! Exact arithmetic and the set/vector types shared by every solver.
//!
//! All costs are [`Rational`]s; [`ExtValue`] adds a single `+inf` used for
//! points outside an effective domain. Subsets are fixed-width bit vectors
//! over ground sets of at most [`MAX_GROUND`] elements.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{invalid, Error, Result};

pub type Rational = num_rational::BigRational;

/// Largest ground set a [`Subset`] can index.
pub const MAX_GROUND: usize = 128;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"7"`, `"-3/4"` or `"10.5"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return invalid("empty number");
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return invalid(format!("malformed decimal {s:?}"));
        }
        let negative = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        let numer = BigInt::from_str(&digits).map_err(|_| Error::InvalidInput(format!("malformed decimal {s:?}")))?;
        let denom = num_traits::pow(BigInt::from(10), frac_part.len());
        let value = Rational::new(numer, denom);
        return Ok(if negative { -value } else { value });
    }
    let value = Rational::from_str(s).map_err(|_| Error::InvalidInput(format!("malformed rational {s:?}")))?;
    Ok(value)
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// An exact rational extended with `+inf`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum ExtValue {
    Finite(Rational),
    Infinite,
}

impl ExtValue {
    pub fn zero() -> Self {
        ExtValue::Finite(Rational::zero())
    }

    pub fn int(n: i64) -> Self {
        ExtValue::Finite(rat(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtValue::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtValue::Finite(q) => Some(q),
            ExtValue::Infinite => None,
        }
    }

    pub fn into_finite(self) -> Option<Rational> {
        match self {
            ExtValue::Finite(q) => Some(q),
            ExtValue::Infinite => None,
        }
    }

    pub fn add_rational(&self, q: &Rational) -> ExtValue {
        match self {
            ExtValue::Finite(a) => ExtValue::Finite(a + q),
            ExtValue::Infinite => ExtValue::Infinite,
        }
    }

    /// `self - other` for a finite `other`.
    pub fn sub_rational(&self, q: &Rational) -> ExtValue {
        match self {
            ExtValue::Finite(a) => ExtValue::Finite(a - q),
            ExtValue::Infinite => ExtValue::Infinite,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "+inf" | "infinity" | "+infinity" => Ok(ExtValue::Infinite),
            other => parse_rational(other).map(ExtValue::Finite),
        }
    }
}

impl From<Rational> for ExtValue {
    fn from(q: Rational) -> Self {
        ExtValue::Finite(q)
    }
}

impl Add for ExtValue {
    type Output = ExtValue;
    fn add(self, rhs: ExtValue) -> ExtValue {
        match (self, rhs) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a + b),
            _ => ExtValue::Infinite,
        }
    }
}

impl<'a> Add<&'a ExtValue> for &'a ExtValue {
    type Output = ExtValue;
    fn add(self, rhs: &ExtValue) -> ExtValue {
        match (self, rhs) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a + b),
            _ => ExtValue::Infinite,
        }
    }
}

impl AddAssign for ExtValue {
    fn add_assign(&mut self, rhs: ExtValue) {
        let lhs = std::mem::replace(self, ExtValue::Infinite);
        *self = lhs + rhs;
    }
}

impl PartialOrd for ExtValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => a.cmp(b),
            (ExtValue::Finite(_), ExtValue::Infinite) => Ordering::Less,
            (ExtValue::Infinite, ExtValue::Finite(_)) => Ordering::Greater,
            (ExtValue::Infinite, ExtValue::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Finite(q) => f.write_str(&format_rational(q)),
            ExtValue::Infinite => f.write_str("inf"),
        }
    }
}

impl fmt::Debug for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite ground set `V = {0, .., size-1}` with optional labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    size: usize,
    labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > MAX_GROUND {
            return invalid(format!("ground set size {size} outside 1..={MAX_GROUND}"));
        }
        Ok(GroundSet { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut ground = GroundSet::new(labels.len())?;
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return invalid("ground set labels must be unique");
        }
        ground.labels = Some(labels);
        Ok(ground)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, e: ElementId) -> String {
        match &self.labels {
            Some(l) => l[e.0].clone(),
            None => e.0.to_string(),
        }
    }

    pub fn index_of(&self, label: &str) -> Option<ElementId> {
        match &self.labels {
            Some(l) => l.iter().position(|x| x == label).map(ElementId),
            None => label.parse::<usize>().ok().filter(|&i| i < self.size).map(ElementId),
        }
    }

    pub fn element(&self, index: usize) -> Result<ElementId> {
        if index < self.size {
            Ok(ElementId(index))
        } else {
            invalid(format!("element {index} outside ground set of size {}", self.size))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId(pub usize);

/// A subset of a ground set of known size, stored as a bit vector.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subset {
    bits: u128,
    size: u32,
}

impl Subset {
    pub fn empty(size: usize) -> Self {
        assert!(size <= MAX_GROUND, "ground set too large for Subset");
        Subset {
            bits: 0,
            size: size as u32,
        }
    }

    pub fn full(size: usize) -> Self {
        let mut s = Subset::empty(size);
        s.bits = if size == MAX_GROUND {
            u128::MAX
        } else {
            (1u128 << size) - 1
        };
        s
    }

    pub fn from_indices(size: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Subset::empty(size);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn from_bits(size: usize, bits: u128) -> Self {
        let mut s = Subset::full(size);
        s.bits &= bits;
        s
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    pub fn ground_size(&self) -> usize {
        self.size as usize
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.size as usize && self.bits >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.size as usize, "element {i} outside ground set");
        self.bits |= 1 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.bits &= !(1u128 << i);
    }

    /// `self - u + v`.
    pub fn exchange(&self, out: usize, inn: usize) -> Subset {
        let mut s = *self;
        s.remove(out);
        s.insert(inn);
        s
    }

    pub fn with(&self, i: usize) -> Subset {
        let mut s = *self;
        s.insert(i);
        s
    }

    pub fn without(&self, i: usize) -> Subset {
        let mut s = *self;
        s.remove(i);
        s
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        Subset {
            bits: self.bits & other.bits,
            size: self.size,
        }
    }

    pub fn union(&self, other: &Subset) -> Subset {
        Subset {
            bits: self.bits | other.bits,
            size: self.size,
        }
    }

    pub fn difference(&self, other: &Subset) -> Subset {
        Subset {
            bits: self.bits & !other.bits,
            size: self.size,
        }
    }

    pub fn complement(&self) -> Subset {
        Subset {
            bits: !self.bits & Subset::full(self.size as usize).bits,
            size: self.size,
        }
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.bits;
        (0..self.size as usize).filter(move |&i| bits >> i & 1 == 1)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Sub-range `[offset, offset + len)` re-indexed from zero.
    pub fn slice(&self, offset: usize, len: usize) -> Subset {
        let mask = if len == MAX_GROUND {
            u128::MAX
        } else {
            (1u128 << len) - 1
        };
        Subset {
            bits: (self.bits >> offset) & mask,
            size: len as u32,
        }
    }

    /// Concatenation of blocks; block `i` occupies bits after all earlier blocks.
    pub fn concat(parts: &[Subset]) -> Subset {
        let total: usize = parts.iter().map(|p| p.ground_size()).sum();
        let mut s = Subset::empty(total);
        let mut offset = 0;
        for p in parts {
            s.bits |= p.bits << offset;
            offset += p.ground_size();
        }
        s
    }

    pub fn to_vector(&self) -> IntVector {
        subset_to_vector(self)
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order on the sorted element lists.
impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter()).then(self.size.cmp(&other.size))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// An integer vector indexed by the ground set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVector(pub Vec<i64>);

impl IntVector {
    pub fn zeros(n: usize) -> Self {
        IntVector(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = IntVector::zeros(n);
        v.0[i] = 1;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }

    /// `self + delta * chi_i`.
    pub fn bumped(&self, i: usize, delta: i64) -> IntVector {
        let mut v = self.clone();
        v.0[i] += delta;
        v
    }

    /// `self - chi_out + chi_in`.
    pub fn moved(&self, out: usize, inn: usize) -> IntVector {
        let mut v = self.clone();
        v.0[out] -= 1;
        v.0[inn] += 1;
        v
    }
}

impl fmt::Debug for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl Neg for IntVector {
    type Output = IntVector;
    fn neg(self) -> IntVector {
        IntVector(self.0.into_iter().map(|x| -x).collect())
    }
}

impl Sub for &IntVector {
    type Output = IntVector;
    fn sub(self, rhs: &IntVector) -> IntVector {
        IntVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

pub fn componentwise_min(x: &IntVector, y: &IntVector) -> Result<IntVector> {
    if x.len() != y.len() {
        return invalid(format!("vector lengths differ: {} vs {}", x.len(), y.len()));
    }
    Ok(IntVector(x.0.iter().zip(&y.0).map(|(a, b)| *a.min(b)).collect()))
}

pub fn subset_to_vector(x: &Subset) -> IntVector {
    IntVector((0..x.ground_size()).map(|i| i64::from(x.contains(i))).collect())
}

/// Inverse of [`subset_to_vector`] on 0/1 vectors.
pub fn vector_to_subset(x: &IntVector) -> Option<Subset> {
    if x.len() > MAX_GROUND || x.0.iter().any(|&c| c != 0 && c != 1) {
        return None;
    }
    Some(Subset::from_indices(
        x.len(),
        x.0.iter().enumerate().filter(|(_, &c)| c == 1).map(|(i, _)| i),
    ))
}

pub fn intersection_cardinality(x: &Subset, y: &Subset) -> usize {
    x.intersection(y).len()
}

/// Sum of `weights` over the members of `x`.
pub fn modular_sum(weights: &[Rational], x: &Subset) -> Rational {
    x.iter().fold(Rational::zero(), |acc, i| acc + &weights[i])
}

pub fn all_nonnegative(w: &[Rational]) -> bool {
    w.iter().all(|q| !q.is_negative())
}

pub fn all_nonpositive(w: &[Rational]) -> bool {
    w.iter().all(|q| !q.is_positive())
}

/// Every `k`-subset of an `n`-set, in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = Subset> {
    let mut idx: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let cur = idx.as_mut()?;
        let out = Subset::from_indices(n, cur.iter().copied());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                idx = None;
                break;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

/// Every subset of an `n`-set (n must be small).
pub fn all_subsets(n: usize) -> impl Iterator<Item = Subset> {
    assert!(n < 64, "power set enumeration limited to n < 64");
    (0u64..(1u64 << n)).map(move |b| Subset::from_bits(n, b as u128))
}

/// Every integer point of the box `[lower, upper]`, odometer order.
pub fn box_points(lower: &[i64], upper: &[i64]) -> impl Iterator<Item = IntVector> {
    let lower = lower.to_vec();
    let upper = upper.to_vec();
    let mut cur: Option<Vec<i64>> = if lower.iter().zip(&upper).all(|(l, u)| l <= u) {
        Some(lower.clone())
    } else {
        None
    };
    std::iter::from_fn(move || {
        let c = cur.as_mut()?;
        let out = IntVector(c.clone());
        let mut i = 0;
        loop {
            if i == c.len() {
                cur = None;
                break;
            }
            if c[i] < upper[i] {
                c[i] += 1;
                break;
            }
            c[i] = lower[i];
            i += 1;
        }
        Some(out)
    })
}

/// Number of lattice points in a box, saturating.
pub fn box_volume(lower: &[i64], upper: &[i64]) -> u128 {
    lower.iter().zip(upper).fold(1u128, |acc, (l, u)| {
        if u < l {
            0
        } else {
            acc.saturating_mul((u - l + 1) as u128)
        }
    })
}
