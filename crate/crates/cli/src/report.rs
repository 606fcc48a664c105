//! Report documents and their re-validation against an instance.
//!
//! Verification reads only the report and the instance; no solver runs.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use valmat::mflow::overlap_objective;
use valmat::primitives::{format_rational, modular_sum, parse_rational};
use valmat::valuated::{dual_valuation, ValuationOracle};
use valmat::viap::{verify_witness, Witness};
use valmat::{ExtValue, IntVector, Rational, Status, Subset};

use crate::instance::{ElementRef, Model};
use crate::solve::{
    congestion, function_pair, independence, k_size, overlap_costs, uncertainty, valuation_list, valuation_pair,
    weighted_matroids, weights, worst_case_function, worst_case_valuation, Outcome,
};
use crate::{CliError, Problem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub problem: String,
    pub status: String,
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_calls: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augmentations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sets: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vectors: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationReport>,
}

/// Potentials on both copies and the matched set. With `dual` set, the
/// certificate is for the first set and the complement of the second
/// under the dual of the second valuation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub dual: bool,
    pub p1: Vec<String>,
    pub p2: Vec<String>,
    pub matched: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub solution_valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_valid: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brute_value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brute_agrees: Option<bool>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.solution_valid && self.witness_valid != Some(false) && self.brute_agrees != Some(false)
    }
}

impl Report {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }

    pub fn is_optimal(&self) -> bool {
        self.status == "optimal"
    }

    pub fn from_outcome(model: &Model, problem: Problem, k: Option<i64>, outcome: &Outcome, oracle_calls: u64) -> Self {
        let status = match outcome.status() {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
        };
        let mut report = Report {
            problem: problem.name().to_string(),
            status: status.to_string(),
            value: outcome.value().to_string(),
            k,
            oracle_calls: Some(oracle_calls),
            augmentations: None,
            wall_time_ms: None,
            sets: Vec::new(),
            vectors: Vec::new(),
            witness: None,
            verification: None,
        };
        if outcome.status() != Status::Optimal {
            return report;
        }
        match outcome {
            Outcome::Pair(s) => {
                report.oracle_calls = Some(oracle_calls.max(s.oracle_calls));
                report.augmentations = Some(s.augmentations as u64);
                report.sets = vec![model.labels_of(&s.x1), model.labels_of(&s.x2)];
                report.witness = s.witness.as_ref().map(|w| WitnessReport {
                    dual: s.witness_is_dual,
                    p1: w.p1.iter().map(format_rational).collect(),
                    p2: w.p2.iter().map(format_rational).collect(),
                    matched: model.labels_of(&w.matched),
                });
            }
            Outcome::Tuple(s) => report.sets = s.sets.iter().map(|x| model.labels_of(x)).collect(),
            Outcome::Vectors(s) => report.vectors = vec![s.x1.0.clone(), s.x2.0.clone()],
        }
        report
    }
}

fn parse_value(text: &str) -> Result<ExtValue, CliError> {
    ExtValue::parse(text).map_err(|e| CliError::invalid("report.value", e))
}

fn parse_set(model: &Model, labels: &[String]) -> Result<Subset, CliError> {
    let refs: Vec<ElementRef> = labels.iter().map(|l| ElementRef::Label(l.clone())).collect();
    let set = model.subset(&refs).map_err(|e| e.within("report.sets"))?;
    if set.len() != labels.len() {
        return Err(CliError::invalid("report.sets", "repeated element"));
    }
    Ok(set)
}

fn parse_rationals(field: &str, xs: &[String]) -> Result<Vec<Rational>, CliError> {
    xs.iter()
        .map(|x| parse_rational(x).map_err(|e| CliError::invalid(field, e)))
        .collect()
}

fn expect_count<T>(field: &str, xs: &[T], count: usize) -> Result<(), CliError> {
    if xs.len() != count {
        return Err(CliError::invalid(
            field,
            format!("expected {count} entries, found {}", xs.len()),
        ));
    }
    Ok(())
}

fn sets(model: &Model, report: &Report, count: usize) -> Result<Vec<Subset>, CliError> {
    expect_count("report.sets", &report.sets, count)?;
    report.sets.iter().map(|s| parse_set(model, s)).collect()
}

fn pair_sets(model: &Model, report: &Report) -> Result<(Subset, Subset), CliError> {
    let s = sets(model, report, 2)?;
    Ok((s[0], s[1]))
}

fn vector_pair(model: &Model, report: &Report) -> Result<(IntVector, IntVector), CliError> {
    expect_count("report.vectors", &report.vectors, 2)?;
    for v in &report.vectors {
        expect_count("report.vectors", v, model.n())?;
    }
    Ok((
        IntVector(report.vectors[0].clone()),
        IntVector(report.vectors[1].clone()),
    ))
}

fn overlap(x1: &IntVector, x2: &IntVector) -> i64 {
    x1.0.iter().zip(&x2.0).map(|(a, b)| *a.min(b)).sum()
}

fn modular_value(w: &[Rational], x: &Subset) -> ExtValue {
    ExtValue::Finite(modular_sum(w, x))
}

/// Checks the certificate of a pair solution: minimality of each side under
/// the reported potentials and the matched set inside the intersection.
fn check_witness(
    model: &Model,
    w: &WitnessReport,
    x1: &Subset,
    x2: &Subset,
    o1: &ValuationOracle,
    o2: &ValuationOracle,
) -> Result<bool, CliError> {
    let witness = Witness {
        p1: parse_rationals("report.witness.p1", &w.p1)?,
        p2: parse_rationals("report.witness.p2", &w.p2)?,
        matched: parse_set(model, &w.matched).map_err(|e| e.within("report.witness"))?,
    };
    let size = witness.matched.len();
    Ok(if w.dual {
        verify_witness(x1, &x2.complement(), &witness, size, o1, &dual_valuation(o2))
    } else {
        verify_witness(x1, x2, &witness, size, o1, o2)
    })
}

/// Recomputes feasibility and objective of a reported solution, and checks
/// its certificate when one is present.
pub fn verify_report(model: &Model, report: &Report) -> Result<VerificationReport, CliError> {
    let problem = Problem::from_name(&report.problem)?;
    let claimed = parse_value(&report.value)?;
    let mut out = VerificationReport {
        solution_valid: false,
        witness_valid: None,
        brute_value: None,
        brute_agrees: None,
    };
    match report.status.as_str() {
        "optimal" => {}
        "infeasible" => {
            out.solution_valid = claimed == ExtValue::Infinite && report.sets.is_empty() && report.vectors.is_empty();
            return Ok(out);
        }
        other => return Err(CliError::invalid("report.status", format!("unknown status '{other}'"))),
    }
    let k = report.k;
    let (feasible, value) = match problem {
        Problem::VGeqK | Problem::VEqK | Problem::VLeqK | Problem::VC => {
            let (o1, o2) = valuation_pair(model)?;
            let (x1, x2) = pair_sets(model, report)?;
            let m = x1.intersection(&x2).len();
            let (feasible, extra) = match problem {
                Problem::VGeqK => (m >= k_size(k)?, ExtValue::zero()),
                Problem::VEqK => (m == k_size(k)?, ExtValue::zero()),
                Problem::VLeqK => (m <= k_size(k)?, ExtValue::zero()),
                _ => (
                    true,
                    overlap_costs(model)?.get(m).cloned().unwrap_or(ExtValue::Infinite),
                ),
            };
            if let Some(w) = &report.witness {
                out.witness_valid = Some(check_witness(model, w, &x1, &x2, &o1, &o2)?);
            }
            (feasible, o1.value(&x1) + o2.value(&x2) + extra)
        }
        Problem::WEqKLpt | Problem::Copic => {
            let wm = weighted_matroids(model)?;
            let (o1, o2) = wm.valuations()?;
            let (x1, x2) = pair_sets(model, report)?;
            let (feasible, extra) = if problem == Problem::Copic {
                let q = weights(model, "problem.q", &model.problem.q)?;
                (true, modular_value(&q, &x1.intersection(&x2)))
            } else {
                (x1.intersection(&x2).len() == k_size(k)?, ExtValue::zero())
            };
            if let Some(w) = &report.witness {
                out.witness_valid = Some(check_witness(model, w, &x1, &x2, &o1, &o2)?);
            }
            (feasible, o1.value(&x1) + o2.value(&x2) + extra)
        }
        Problem::VIn | Problem::VNW | Problem::Congestion => {
            let omegas = valuation_list(model)?;
            let xs = sets(model, report, omegas.len())?;
            let common = xs.iter().fold(Subset::full(model.n()), |acc, x| acc.intersection(x));
            match problem {
                Problem::VIn => {
                    let total = omegas
                        .iter()
                        .zip(&xs)
                        .fold(ExtValue::zero(), |acc, (o, x)| acc + o.value(x));
                    (independence(model)?.is_independent(&common), total)
                }
                Problem::VNW => {
                    let w = weights(model, "problem.w", &model.problem.w)?;
                    let total = omegas
                        .iter()
                        .zip(&xs)
                        .fold(modular_value(&w, &common), |acc, (o, x)| acc + o.value(x));
                    (true, total)
                }
                _ => (true, congestion(model)?.total_cost(&xs)),
            }
        }
        Problem::MGeqKW => {
            let (f1, f2) = function_pair(model)?;
            let (x1, x2) = vector_pair(model, report)?;
            let w = weights(model, "problem.w", &model.problem.w)?;
            (
                overlap(&x1, &x2) >= k.unwrap_or(0),
                overlap_objective(&f1, &f2, &w, &x1, &x2),
            )
        }
        Problem::RecoverableRobust => {
            let unc = uncertainty(model)?;
            if model.problem.functions.is_empty() {
                let first = valuation_list(model)?.remove(0);
                let second = worst_case_valuation(&first, &unc.upper)?;
                let (x1, x2) = pair_sets(model, report)?;
                (
                    x1.intersection(&x2).len() >= k_size(k)?,
                    first.value(&x1) + second.value(&x2),
                )
            } else {
                let (f1, f2) = function_pair(model)?;
                let g2 = worst_case_function(&f2, &unc.upper)?;
                let (x1, x2) = vector_pair(model, report)?;
                let zero = vec![Rational::zero(); model.n()];
                (
                    overlap(&x1, &x2) >= k.unwrap_or(0),
                    overlap_objective(&f1, &g2, &zero, &x1, &x2),
                )
            }
        }
    };
    out.solution_valid = feasible && value.is_finite() && value == claimed;
    Ok(out)
}
