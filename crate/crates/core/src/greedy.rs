//! Unconstrained minimization of a single valuated matroid by steepest
//! single-exchange descent. Local minimality is global for valuated
//! matroids, so the descent's stopping point is certified optimal.

use crate::error::{Error, Result};
use crate::matroid::ExplicitBaseFamily;
use crate::primitives::{modular_sum, ExtValue, Rational, Subset};
use crate::valuated::ValuationOracle;

/// `ω(X) + Σ_{v∈X} shift(v)`; `shift = None` means no shift.
pub fn shifted_value(omega: &ValuationOracle, shift: Option<&[Rational]>, x: &Subset) -> ExtValue {
    let v = omega.value(x);
    match shift {
        Some(s) => v.add_rational(&modular_sum(s, x)),
        None => v,
    }
}

/// Best improving exchange `X - u + v`, ties broken by smallest `(u, v)`.
fn best_exchange(
    omega: &ValuationOracle,
    shift: Option<&[Rational]>,
    x: &Subset,
    current: &ExtValue,
) -> Option<(Subset, ExtValue)> {
    let outside = x.complement();
    let mut best: Option<(Subset, ExtValue)> = None;
    for u in x.iter() {
        for v in outside.iter() {
            let y = x.exchange(u, v);
            let val = shifted_value(omega, shift, &y);
            if !val.is_finite() || val >= *current {
                continue;
            }
            if best.as_ref().is_none_or(|(_, b)| val < *b) {
                best = Some((y, val));
            }
        }
    }
    best
}

/// True iff no single exchange improves `ω + shift` at `x`.
pub fn is_local_minimum(omega: &ValuationOracle, shift: Option<&[Rational]>, x: &Subset) -> bool {
    let current = shifted_value(omega, shift, x);
    current.is_finite() && best_exchange(omega, shift, x, &current).is_none()
}

/// Minimizes `ω + shift` starting from `start`.
pub fn descend(omega: &ValuationOracle, shift: Option<&[Rational]>, start: Subset) -> Result<(Subset, ExtValue)> {
    let mut x = start;
    let mut current = shifted_value(omega, shift, &x);
    if !current.is_finite() {
        return Err(Error::EmptyDomain("descent started outside the domain".into()));
    }
    while let Some((y, val)) = best_exchange(omega, shift, &x, &current) {
        x = y;
        current = val;
    }
    Ok((x, current))
}

/// A global minimizer of `ω` and its value.
pub fn minimize_valuated(omega: &ValuationOracle) -> Result<(Subset, ExtValue)> {
    descend(omega, None, omega.witness_base())
}

/// Every minimizer of `ω`, by exhaustive scan of its domain.
pub fn minimizer_family(omega: &ValuationOracle, limit: usize) -> Result<Vec<Subset>> {
    let dom = omega.domain(limit)?;
    let Some(min) = dom.iter().map(|(_, v)| v).min().cloned() else {
        return Err(Error::EmptyDomain("valuation has no finite point".into()));
    };
    Ok(dom.into_iter().filter(|(_, v)| *v == min).map(|(x, _)| x).collect())
}

/// [`minimizer_family`] packaged as a base family.
pub fn minimizer_bases(omega: &ValuationOracle, limit: usize) -> Result<ExplicitBaseFamily> {
    ExplicitBaseFamily::new(omega.ground_size(), minimizer_family(omega, limit)?)
}
