//! Command-line driver: instance files in, deterministic TOML reports out.

pub mod generate;
pub mod instance;
pub mod report;
pub mod solve;

use std::fmt::Display;

use clap::ValueEnum;
use thiserror::Error;

pub use instance::{InstanceFile, Model};
pub use report::{Report, VerificationReport};

/// Process exit codes.
pub mod exit {
    pub const OPTIMAL: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const INFEASIBLE: u8 = 2;
    pub const INVALID: u8 = 3;
    pub const RESOURCE: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input in {field}: {msg}")]
    Invalid { field: String, msg: String },
    #[error(transparent)]
    Solver(#[from] valmat::Error),
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn invalid(field: &str, msg: impl Display) -> Self {
        CliError::Invalid {
            field: field.to_string(),
            msg: msg.to_string(),
        }
    }

    /// Prefixes the location of an input error with `ctx`.
    pub fn within(self, ctx: &str) -> Self {
        match self {
            CliError::Invalid { field, msg } => CliError::Invalid {
                field: format!("{ctx}.{field}"),
                msg,
            },
            CliError::Solver(valmat::Error::InvalidInput(msg)) | CliError::Solver(valmat::Error::EmptyDomain(msg)) => {
                CliError::Invalid {
                    field: ctx.to_string(),
                    msg,
                }
            }
            other => other,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Invalid { .. } | CliError::Io { .. } => exit::INVALID,
            CliError::Solver(valmat::Error::InvalidInput(_) | valmat::Error::EmptyDomain(_)) => exit::INVALID,
            CliError::Solver(valmat::Error::ResourceLimit(_)) => exit::RESOURCE,
            CliError::Solver(_) | CliError::Verification(_) => exit::FAILURE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    #[value(name = "v_geq_k")]
    VGeqK,
    #[value(name = "v_eq_k")]
    VEqK,
    #[value(name = "v_leq_k")]
    VLeqK,
    #[value(name = "v_in")]
    VIn,
    #[value(name = "v_n_w")]
    VNW,
    #[value(name = "m_geq_k_w")]
    MGeqKW,
    #[value(name = "w_eq_k_lpt")]
    WEqKLpt,
    #[value(name = "v_c")]
    VC,
    #[value(name = "copic")]
    Copic,
    #[value(name = "recoverable_robust")]
    RecoverableRobust,
    #[value(name = "congestion")]
    Congestion,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::VGeqK => "v_geq_k",
            Problem::VEqK => "v_eq_k",
            Problem::VLeqK => "v_leq_k",
            Problem::VIn => "v_in",
            Problem::VNW => "v_n_w",
            Problem::MGeqKW => "m_geq_k_w",
            Problem::WEqKLpt => "w_eq_k_lpt",
            Problem::VC => "v_c",
            Problem::Copic => "copic",
            Problem::RecoverableRobust => "recoverable_robust",
            Problem::Congestion => "congestion",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, CliError> {
        Problem::from_str(name, false).map_err(|_| CliError::invalid("problem", format!("unknown problem '{name}'")))
    }

    /// Problems whose parameters include `k`.
    pub fn takes_k(self) -> bool {
        matches!(
            self,
            Problem::VGeqK
                | Problem::VEqK
                | Problem::VLeqK
                | Problem::MGeqKW
                | Problem::WEqKLpt
                | Problem::RecoverableRobust
        )
    }
}

pub fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: &std::path::Path) -> Result<Model, CliError> {
    Model::build(&InstanceFile::parse(&read_file(path)?)?)
}
