use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::{run, CliError, RunConfig};

/// Radial Schrödinger–Maxwell solver. Flags override keys from `--config`.
#[derive(Debug, Parser)]
#[command(name = "smx", version)]
pub struct Args {
    /// key=value file (`#` comments) or a JSON config echo
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// solve | multiplicity | minimax | verify | hydrogen
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    /// coulomb | power_law | yukawa | zero
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long = "Z")]
    pub z: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long = "k-max")]
    pub k_max: Option<String>,
    #[arg(long = "grid-n")]
    pub grid_n: Option<String>,
    #[arg(long = "r-max")]
    pub r_max: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// Any other config key, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

pub fn config_from_args(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v)?;
    }
    let flags = [
        ("mode", &args.mode),
        ("omega", &args.omega),
        ("potential", &args.potential),
        ("Z", &args.z),
        ("alpha", &args.alpha),
        ("mu", &args.mu),
        ("k_max", &args.k_max),
        ("grid_n", &args.grid_n),
        ("r_max", &args.r_max),
        ("seed", &args.seed),
        ("out", &args.out),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    Ok(cfg)
}

/// Parses `argv`, runs, reports to stderr and returns the exit code.
pub fn main_with<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = config_from_args(&args).and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => {
            for line in &outcome.messages {
                println!("{line}");
            }
            0
        }
        Err(e) => {
            eprintln!("smx: {e}");
            e.exit_code()
        }
    }
}
