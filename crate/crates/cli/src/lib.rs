//! `rav`: JSON run configs in, CSV and JSON artifacts out.
//!
//! ```text
//! rav <dispersion|hugoniot|profile|evolve|verify <check>> --config <path>
//!     [--out <prefix>] [--threads N] [--seed S]
//! ```
//!
//! Exit status is 0 on success, 2 when the config fails to parse or
//! validate, and 1 when a numerical kernel reports a domain error. In the
//! last case the rows produced so far are kept and the summary carries
//! `{"error": <kind>}`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::config::{ConfigError, RunConfig, VerifyCheck};
use rav_core::Execution;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rav", version, about = "Relativistic Euler equations with artificial viscosity: numerical laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run config.
    #[arg(long)]
    config: PathBuf,
    /// Output path prefix for the CSV and summary files.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for randomized sweeps.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dispersion roots over a list or sweep of wave numbers.
    Dispersion(Common),
    /// Rankine-Hugoniot points along the locus through a left state.
    Hugoniot(Common),
    /// Viscous shock profile of one jump.
    Profile(Common),
    /// Method-of-lines evolution of a 1D field.
    Evolve(Common),
    /// Convergence studies: `covariance` or `classical-limit`.
    Verify {
        check: String,
        #[command(flatten)]
        common: Common,
    },
}

/// Failure raised while executing a run.
#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Domain(rav_core::Error),
    Io(std::io::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<rav_core::Error> for Failure {
    fn from(e: rav_core::Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Resolved run context.
pub struct Context {
    pub prefix: String,
    pub seed: u64,
    pub exec: Execution,
}

/// Parse arguments, run, and return the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (name, check, common) = match cli.command {
        Command::Dispersion(c) => ("dispersion", None, c),
        Command::Hugoniot(c) => ("hugoniot", None, c),
        Command::Profile(c) => ("profile", None, c),
        Command::Evolve(c) => ("evolve", None, c),
        Command::Verify { check, common } => ("verify", Some(check), common),
    };
    let mut config = match load_config(&common.config, name, check.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    let exec = match common.threads {
        Some(0) => {
            eprintln!("config error: --threads: must be at least 1");
            return EXIT_CONFIG;
        }
        Some(1) => Execution::Sequential,
        Some(n) => {
            rav_core::exec::configure_threads(n);
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let (prefix, seed) = config.resolve(common.out, common.seed);
    if let Some(dir) = PathBuf::from(&prefix).parent() {
        if !dir.as_os_str().is_empty() {
            if let Err(e) = std::fs::create_dir_all(dir) {
                eprintln!("error: cannot create output directory {}: {e}", dir.display());
                return EXIT_DOMAIN;
            }
        }
    }
    let ctx = Context { prefix, seed, exec };
    match commands::execute(&config, &ctx) {
        Ok(results) => match write_summary(&ctx, &config, results) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_DOMAIN
            }
        },
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            EXIT_CONFIG
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            let mut m = Map::new();
            m.insert("error".into(), Value::from(e.kind()));
            m.insert("message".into(), Value::from(e.to_string()));
            let _ = write_summary(&ctx, &config, m);
            EXIT_DOMAIN
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_DOMAIN
        }
    }
}

fn load_config(path: &std::path::Path, name: &str, check: Option<&str>) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| ConfigError::new(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| ConfigError::new("config", "top level must be a JSON object"))?;
    match obj.get("subcommand") {
        None => {
            obj.insert("subcommand".into(), Value::from(name));
        }
        Some(Value::String(s)) if s == name => {}
        Some(other) => {
            return Err(ConfigError::new(
                "subcommand",
                format!("config is for {other}, invoked as {name}"),
            ))
        }
    }
    if let Some(c) = check {
        let parsed = VerifyCheck::parse(c).ok_or_else(|| {
            ConfigError::new("check", format!("unknown check `{c}`, expected covariance or classical-limit"))
        })?;
        let tag = serde_json::to_value(parsed).expect("enum serializes");
        match obj.get("check") {
            None => {
                obj.insert("check".into(), tag);
            }
            Some(v) if *v == tag => {}
            Some(v) => return Err(ConfigError::new("check", format!("config asks for {v}, invoked as {c}"))),
        }
    }
    serde_json::from_value(value).map_err(|e| ConfigError::new("config", e.to_string()))
}

fn write_summary(ctx: &Context, config: &RunConfig, mut results: Map<String, Value>) -> std::io::Result<()> {
    results.insert("config".into(), serde_json::to_value(config).map_err(std::io::Error::other)?);
    results.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    results.insert("subcommand".into(), Value::from(config.name()));
    output::write_json(&output::artifact(&ctx.prefix, ".summary.json"), &results)
}
