use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cclab::experiments::config::parse_list;
use cclab::experiments::{
    self, exit, DeltaChoice, ExperimentConfig, ExperimentKind, OutputFormat, Overrides,
};
use cclab::{Error, Result};

/// Exceedance experiments for convex combinations of Gaussian vectors.
#[derive(Debug, Parser)]
#[command(name = "cclab", version)]
struct Cli {
    /// dkw, upper, lower-pipeline, box-lower, sandwich, dominance or reordering-oracle
    experiment: String,
    /// Sample size of each vector.
    #[arg(long)]
    n: Option<usize>,
    /// Arity, or a comma-separated list of arities.
    #[arg(long)]
    k: Option<String>,
    /// Number of averaged coordinates, or a comma-separated list.
    #[arg(long)]
    d: Option<String>,
    /// Block size for the reordering oracle.
    #[arg(long)]
    m: Option<usize>,
    /// Comma-separated upper-block masses to search.
    #[arg(long = "rho-grid")]
    rho_grid: Option<String>,
    /// `auto` or a fixed Wasserstein radius.
    #[arg(long)]
    delta: Option<String>,
    /// Monte Carlo trials.
    #[arg(long)]
    samples: Option<usize>,
    /// Overridden by CCLAB_SEED when set.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv
    #[arg(long)]
    format: Option<String>,
}

fn config(cli: Cli) -> Result<ExperimentConfig> {
    let kind: ExperimentKind = cli.experiment.parse()?;
    let seed = match std::env::var("CCLAB_SEED") {
        Ok(s) => Some(s.trim().parse().map_err(|_| {
            Error::Config(format!("CCLAB_SEED must be an unsigned integer, got '{s}'"))
        })?),
        Err(_) => cli.seed,
    };
    let overrides = Overrides {
        n: cli.n,
        k: cli.k.as_deref().map(parse_list).transpose()?,
        d: cli.d.as_deref().map(parse_list).transpose()?,
        m: cli.m,
        rho_grid: cli.rho_grid.as_deref().map(parse_list).transpose()?,
        delta: cli
            .delta
            .as_deref()
            .map(str::parse::<DeltaChoice>)
            .transpose()?,
        samples: cli.samples,
        seed,
        threads: cli.threads,
        out: cli.out,
        format: cli
            .format
            .as_deref()
            .map(str::parse::<OutputFormat>)
            .transpose()?,
    };
    ExperimentConfig::resolve(kind, overrides)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::CONFIG
            } else {
                exit::PASS
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = config(cli)
        .and_then(|cfg| experiments::run(&cfg))
        .unwrap_or_else(|e| {
            eprintln!("cclab: {e}");
            experiments::exit_code(&e)
        });
    ExitCode::from(code as u8)
}
