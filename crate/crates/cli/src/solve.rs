//! Problem dispatch for the fast solvers and the brute-force oracles.

use num_traits::{Signed, Zero};

use valmat::apps::{
    solve_congestion_social_optimum, solve_copic_diagonal, solve_recoverable_robust_interval,
    solve_recoverable_robust_m_convex, solve_v_c, CongestionInstance, IntervalUncertainty,
};
use valmat::bruteforce::{
    brute_congestion, brute_copic, brute_m_geq_k_w, brute_v_c, brute_v_eq_k, brute_v_geq_k, brute_v_in, brute_v_leq_k,
    brute_v_n_w,
};
use valmat::matroid::MatroidOracle;
use valmat::mflow::solve_m_geq_k_w;
use valmat::primitives::modular_sum;
use valmat::reference::lpt_solve_w_eq_k;
use valmat::valuated::{from_matroid_and_weights, MnatFunction, ValuationOracle};
use valmat::viap::{solve_v_eq_k, solve_v_geq_k, IntersectionSolution};
use valmat::vmi::{solve_v_in, solve_v_leq_k, solve_v_n_w};
use valmat::{ExtValue, Rational, Status, TupleSolution, VectorPairSolution};

use crate::instance::{Model, Num};
use crate::{CliError, Problem};

pub enum Outcome {
    Pair(IntersectionSolution),
    Tuple(TupleSolution),
    Vectors(VectorPairSolution),
}

impl Outcome {
    pub fn status(&self) -> Status {
        match self {
            Outcome::Pair(s) => s.status,
            Outcome::Tuple(s) => s.status,
            Outcome::Vectors(s) => s.status,
        }
    }

    pub fn value(&self) -> &ExtValue {
        match self {
            Outcome::Pair(s) => &s.value,
            Outcome::Tuple(s) => &s.value,
            Outcome::Vectors(s) => &s.value,
        }
    }
}

/// The `k` of a run: the command line wins over the instance file.
pub fn effective_k(model: &Model, problem: Problem, k: Option<i64>) -> Result<Option<i64>, CliError> {
    if !problem.takes_k() {
        return Ok(None);
    }
    match k.or(model.problem.k) {
        Some(k) => Ok(Some(k)),
        None => Err(CliError::invalid("problem.k", format!("{} needs k", problem.name()))),
    }
}

pub(crate) fn k_size(k: Option<i64>) -> Result<usize, CliError> {
    let k = k.ok_or_else(|| CliError::invalid("problem.k", "missing"))?;
    usize::try_from(k).map_err(|_| CliError::invalid("problem.k", "must be nonnegative"))
}

pub(crate) fn valuation_list(model: &Model) -> Result<Vec<ValuationOracle>, CliError> {
    if model.problem.valuations.is_empty() {
        return Err(CliError::invalid("problem.valuations", "no valuations named"));
    }
    model
        .problem
        .valuations
        .iter()
        .map(|n| model.valuation(n).cloned())
        .collect()
}

pub(crate) fn valuation_pair(model: &Model) -> Result<(ValuationOracle, ValuationOracle), CliError> {
    let list = valuation_list(model)?;
    match <[ValuationOracle; 2]>::try_from(list) {
        Ok([a, b]) => {
            if a.ground_size() != b.ground_size() {
                return Err(CliError::invalid(
                    "problem.valuations",
                    "valuations over different ground sets",
                ));
            }
            Ok((a, b))
        }
        Err(_) => Err(CliError::invalid("problem.valuations", "expected exactly two names")),
    }
}

pub(crate) fn function_pair(model: &Model) -> Result<(MnatFunction, MnatFunction), CliError> {
    match model.problem.functions.as_slice() {
        [a, b] => Ok((model.function(a)?.clone(), model.function(b)?.clone())),
        _ => Err(CliError::invalid("problem.functions", "expected exactly two names")),
    }
}

pub(crate) struct WeightedMatroids {
    pub m1: MatroidOracle,
    pub m2: MatroidOracle,
    pub w1: Vec<Rational>,
    pub w2: Vec<Rational>,
}

impl WeightedMatroids {
    pub fn valuations(&self) -> Result<(ValuationOracle, ValuationOracle), CliError> {
        Ok((
            from_matroid_and_weights(&self.m1, &self.w1)?,
            from_matroid_and_weights(&self.m2, &self.w2)?,
        ))
    }
}

pub(crate) fn weighted_matroids(model: &Model) -> Result<WeightedMatroids, CliError> {
    let [a, b] = model.problem.matroids.as_slice() else {
        return Err(CliError::invalid("problem.matroids", "expected exactly two names"));
    };
    Ok(WeightedMatroids {
        m1: model.matroid(a)?.clone(),
        m2: model.matroid(b)?.clone(),
        w1: weights(model, "problem.w1", &model.problem.w1)?,
        w2: weights(model, "problem.w2", &model.problem.w2)?,
    })
}

pub(crate) fn weights(model: &Model, field: &str, w: &Option<Vec<Num>>) -> Result<Vec<Rational>, CliError> {
    match w {
        Some(w) => model.weights(field, w),
        None => Err(CliError::invalid(field, "missing")),
    }
}

pub(crate) fn overlap_costs(model: &Model) -> Result<Vec<ExtValue>, CliError> {
    let c = model
        .problem
        .c
        .as_ref()
        .ok_or_else(|| CliError::invalid("problem.c", "missing"))?;
    c.iter().map(|x| x.ext("problem.c")).collect()
}

pub(crate) fn uncertainty(model: &Model) -> Result<IntervalUncertainty, CliError> {
    let lower = weights(model, "problem.lower", &model.problem.lower)?;
    let upper = weights(model, "problem.upper", &model.problem.upper)?;
    IntervalUncertainty::new(lower, upper).map_err(|e| CliError::from(e).within("problem"))
}

pub(crate) fn congestion(model: &Model) -> Result<CongestionInstance, CliError> {
    let delays = model
        .problem
        .delays
        .as_ref()
        .ok_or_else(|| CliError::invalid("problem.delays", "missing"))?;
    let delays = delays
        .iter()
        .map(|d| {
            d.iter()
                .map(|x| x.rational("problem.delays"))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    CongestionInstance::new(valuation_list(model)?, delays).map_err(|e| CliError::from(e).within("problem"))
}

pub(crate) fn independence(model: &Model) -> Result<MatroidOracle, CliError> {
    let name = model
        .problem
        .independence
        .as_ref()
        .ok_or_else(|| CliError::invalid("problem.independence", "missing"))?;
    Ok(model.matroid(name)?.clone())
}

/// The second-stage cost of the robust problem: `upper(X)` on the domain
/// of the first stage.
pub(crate) fn worst_case_valuation(first: &ValuationOracle, upper: &[Rational]) -> Result<ValuationOracle, CliError> {
    let (f, u) = (first.clone(), upper.to_vec());
    Ok(ValuationOracle::from_fn(
        first.ground_size(),
        first.rank(),
        first.witness_base(),
        "worst-case",
        move |x| {
            if f.in_domain(x) {
                ExtValue::Finite(modular_sum(&u, x))
            } else {
                ExtValue::Infinite
            }
        },
    )?)
}

pub(crate) fn worst_case_function(f: &MnatFunction, upper: &[Rational]) -> Result<MnatFunction, CliError> {
    let (g, u) = (f.clone(), upper.to_vec());
    Ok(MnatFunction::from_fn(
        f.lower().to_vec(),
        f.upper().to_vec(),
        f.witness_point().clone(),
        move |x| {
            let linear: Rational = u
                .iter()
                .zip(&x.0)
                .map(|(w, &c)| w * Rational::from_integer(c.into()))
                .sum();
            g.value(x).add_rational(&linear)
        },
    )?)
}

pub fn solve(model: &Model, problem: Problem, k: Option<i64>) -> Result<Outcome, CliError> {
    let outcome = match problem {
        Problem::VGeqK | Problem::VEqK | Problem::VLeqK => {
            let (a, b) = valuation_pair(model)?;
            let k = k_size(k)?;
            Outcome::Pair(match problem {
                Problem::VGeqK => solve_v_geq_k(&a, &b, k)?,
                Problem::VEqK => solve_v_eq_k(&a, &b, k)?,
                _ => solve_v_leq_k(&a, &b, k)?,
            })
        }
        Problem::VC => {
            let (a, b) = valuation_pair(model)?;
            Outcome::Pair(solve_v_c(&a, &b, &overlap_costs(model)?)?)
        }
        Problem::WEqKLpt => {
            let wm = weighted_matroids(model)?;
            Outcome::Pair(lpt_solve_w_eq_k(&wm.m1, &wm.m2, &wm.w1, &wm.w2, k_size(k)?)?)
        }
        Problem::Copic => {
            let wm = weighted_matroids(model)?;
            let q = weights(model, "problem.q", &model.problem.q)?;
            Outcome::Pair(solve_copic_diagonal(&wm.m1, &wm.m2, &wm.w1, &wm.w2, &q)?)
        }
        Problem::VIn => Outcome::Tuple(solve_v_in(&valuation_list(model)?, &independence(model)?)?),
        Problem::VNW => {
            let w = weights(model, "problem.w", &model.problem.w)?;
            if w.iter().any(|x| x.is_negative()) {
                return Err(CliError::invalid("problem.w", "weights must be nonnegative"));
            }
            Outcome::Tuple(solve_v_n_w(&valuation_list(model)?, &w)?)
        }
        Problem::Congestion => Outcome::Tuple(solve_congestion_social_optimum(&congestion(model)?)?),
        Problem::MGeqKW => {
            let (f1, f2) = function_pair(model)?;
            let w = weights(model, "problem.w", &model.problem.w)?;
            Outcome::Vectors(solve_m_geq_k_w(&f1, &f2, k.unwrap_or(0), &w)?)
        }
        Problem::RecoverableRobust => {
            let unc = uncertainty(model)?;
            if model.problem.functions.is_empty() {
                let [name] = model.problem.valuations.as_slice() else {
                    return Err(CliError::invalid(
                        "problem.valuations",
                        "expected one first-stage valuation",
                    ));
                };
                Outcome::Pair(solve_recoverable_robust_interval(
                    model.valuation(name)?,
                    &unc,
                    k_size(k)?,
                )?)
            } else {
                let (f1, f2) = function_pair(model)?;
                Outcome::Vectors(solve_recoverable_robust_m_convex(&f1, &f2, &unc, k.unwrap_or(0))?)
            }
        }
    };
    Ok(outcome)
}

/// The optimal value by exhaustive enumeration, capped at `limit` points.
pub fn brute_value(model: &Model, problem: Problem, k: Option<i64>, limit: u128) -> Result<ExtValue, CliError> {
    let value = match problem {
        Problem::VGeqK | Problem::VEqK | Problem::VLeqK => {
            let (a, b) = valuation_pair(model)?;
            let k = k_size(k)?;
            match problem {
                Problem::VGeqK => brute_v_geq_k(&a, &b, k, limit)?.value,
                Problem::VEqK => brute_v_eq_k(&a, &b, k, limit)?.value,
                _ => brute_v_leq_k(&a, &b, k, limit)?.value,
            }
        }
        Problem::VC => {
            let (a, b) = valuation_pair(model)?;
            brute_v_c(&a, &b, &overlap_costs(model)?, limit)?.value
        }
        Problem::WEqKLpt => {
            let (a, b) = weighted_matroids(model)?.valuations()?;
            brute_v_eq_k(&a, &b, k_size(k)?, limit)?.value
        }
        Problem::Copic => {
            let wm = weighted_matroids(model)?;
            let q = weights(model, "problem.q", &model.problem.q)?;
            brute_copic(&wm.m1, &wm.m2, &wm.w1, &wm.w2, &q, limit)?.value
        }
        Problem::VIn => brute_v_in(&valuation_list(model)?, &independence(model)?, limit)?.value,
        Problem::VNW => {
            let w = weights(model, "problem.w", &model.problem.w)?;
            brute_v_n_w(&valuation_list(model)?, &w, limit)?.value
        }
        Problem::Congestion => {
            let inst = congestion(model)?;
            brute_congestion(&inst.players, &inst.delays, limit)?.value
        }
        Problem::MGeqKW => {
            let (f1, f2) = function_pair(model)?;
            let w = weights(model, "problem.w", &model.problem.w)?;
            brute_m_geq_k_w(&f1, &f2, k.unwrap_or(0), &w, limit)?.value
        }
        Problem::RecoverableRobust => {
            let unc = uncertainty(model)?;
            if model.problem.functions.is_empty() {
                let first = valuation_list(model)?.remove(0);
                let second = worst_case_valuation(&first, &unc.upper)?;
                brute_v_geq_k(&first, &second, k_size(k)?, limit)?.value
            } else {
                let (f1, f2) = function_pair(model)?;
                let g2 = worst_case_function(&f2, &unc.upper)?;
                let zero = vec![Rational::zero(); f1.dimension()];
                brute_m_geq_k_w(&f1, &g2, k.unwrap_or(0), &zero, limit)?.value
            }
        }
    };
    Ok(value)
}
