//! Driver for the `smx` binary: flat key=value configuration, run modes and
//! CSV/JSON artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod args;
mod config;
mod run;

pub use args::{config_from_args, main_with, Args};
pub use config::{Mode, RunConfig};
pub use run::{run, RunOutcome, SCHEMA_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    /// `multiplicity` or `minimax` was asked to run with `omega >= 0`.
    #[error("hypothesis error: {0}")]
    Hypothesis(String),
    #[error("not converged: {0}")]
    NonConvergence(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Numerics(#[from] smx::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Hypothesis(_) => 3,
            Self::NonConvergence(_) => 4,
            Self::Io(_) | Self::Numerics(_) => 1,
        }
    }
}
