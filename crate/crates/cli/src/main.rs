use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use valmat::bruteforce::DEFAULT_LIMIT;
use valmat::valuated::{check_mnat_exchange, check_valuated_exchange};
use valmat::Status;
use valmat_cli::report::verify_report;
use valmat_cli::solve::{brute_value, effective_k, solve};
use valmat_cli::{exit, generate, load_model, read_file, CliError, Problem, Report};

#[derive(Parser)]
#[command(
    name = "valmat",
    version,
    about = "Exact solvers for valuated matroid intersection problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem on an instance file and print a TOML report.
    Solve {
        problem: Problem,
        instance: PathBuf,
        /// Overrides `k` from the instance file.
        #[arg(long, allow_negative_numbers = true)]
        k: Option<i64>,
        /// Re-check the reported solution and its certificate.
        #[arg(long)]
        verify: bool,
        /// Compare against exhaustive enumeration.
        #[arg(long)]
        brute: bool,
        /// Point cap for exhaustive enumeration.
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: u128,
        /// Include wall time in the report (makes it nondeterministic).
        #[arg(long)]
        timing: bool,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Re-validate a report against its instance without solving.
    Verify { instance: PathBuf, report: PathBuf },
    /// Check the exchange axiom of the valuations and functions of an instance.
    Check {
        what: CheckKind,
        instance: PathBuf,
        /// Only check this valuation or function.
        #[arg(long)]
        name: Option<String>,
    },
    /// Print a random small instance.
    Generate {
        problem: Problem,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        size: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Exchange,
}

#[derive(Serialize)]
struct CheckReport {
    #[serde(rename = "check")]
    checks: Vec<CheckEntry>,
}

#[derive(Serialize)]
struct CheckEntry {
    name: String,
    kind: &'static str,
    exchange: bool,
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Solve {
            problem,
            instance,
            k,
            verify,
            brute,
            limit,
            timing,
            output,
        } => {
            let model = load_model(&instance)?;
            let k = effective_k(&model, problem, k)?;
            let start = Instant::now();
            let outcome = solve(&model, problem, k)?;
            let elapsed = start.elapsed();
            let calls = model.valuations.values().map(|o| o.query_count()).sum();
            let mut report = Report::from_outcome(&model, problem, k, &outcome, calls);
            if timing {
                report.wall_time_ms = Some(elapsed.as_secs_f64() * 1e3);
            }
            let mut passed = true;
            if verify || brute {
                let mut v = verify_report(&model, &report)?;
                if brute {
                    let value = brute_value(&model, problem, k, limit)?;
                    v.brute_agrees = Some(value == *outcome.value());
                    v.brute_value = Some(value.to_string());
                }
                passed = v.passed();
                report.verification = Some(v);
            }
            emit(&report.to_toml(), output.as_ref())?;
            eprintln!(
                "{} {}: {} value {} in {:.3} ms",
                problem.name(),
                instance.display(),
                report.status,
                report.value,
                elapsed.as_secs_f64() * 1e3
            );
            if !passed {
                return Err(CliError::Verification(
                    "see the verification section of the report".into(),
                ));
            }
            Ok(match outcome.status() {
                Status::Optimal => exit::OPTIMAL,
                Status::Infeasible => exit::INFEASIBLE,
            })
        }
        Command::Verify { instance, report } => {
            let model = load_model(&instance)?;
            let report = Report::parse(&read_file(&report)?)?;
            let v = verify_report(&model, &report)?;
            print!("{}", toml::to_string(&v).expect("verification serializes"));
            if !v.passed() {
                return Err(CliError::Verification("reported solution does not check out".into()));
            }
            Ok(if report.is_optimal() {
                exit::OPTIMAL
            } else {
                exit::INFEASIBLE
            })
        }
        Command::Check {
            what: CheckKind::Exchange,
            instance,
            name,
        } => {
            let model = load_model(&instance)?;
            let wanted = |n: &str| name.as_deref().is_none_or(|x| x == n);
            let mut checks = Vec::new();
            for (n, o) in model.valuations.iter().filter(|(n, _)| wanted(n)) {
                checks.push(CheckEntry {
                    name: n.clone(),
                    kind: "valuation",
                    exchange: check_valuated_exchange(o)?,
                });
            }
            for (n, f) in model.functions.iter().filter(|(n, _)| wanted(n)) {
                checks.push(CheckEntry {
                    name: n.clone(),
                    kind: "function",
                    exchange: check_mnat_exchange(f)?,
                });
            }
            if checks.is_empty() {
                return Err(CliError::invalid("check", "nothing to check"));
            }
            let ok = checks.iter().all(|c| c.exchange);
            print!(
                "{}",
                toml::to_string(&CheckReport { checks }).expect("check report serializes")
            );
            Ok(if ok { exit::OPTIMAL } else { exit::FAILURE })
        }
        Command::Generate { problem, seed, size } => {
            print!("{}", generate::generate(problem, seed, size)?.to_toml());
            Ok(exit::OPTIMAL)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::INVALID } else { exit::OPTIMAL };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
