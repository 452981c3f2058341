//! Reproducible experiments and their reports.

pub mod config;
pub mod dkw;
pub mod lower;
pub mod oracle;
pub mod report;
pub mod sandwich;
pub mod upper;

use std::time::Instant;

use rayon::prelude::*;

pub use config::{DeltaChoice, ExperimentConfig, ExperimentKind, OutputFormat, Overrides};
pub use report::{ExperimentReport, Margin};

use crate::error::{Error, Result};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const BOUND_VIOLATION: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const IO: i32 = 4;
    pub const NUMERIC: i32 = 5;
    pub const UNKNOWN_EXPERIMENT: i32 = 64;
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) => exit::CONFIG,
        Error::Io(_) => exit::IO,
        Error::NoConvergence(_) => exit::NUMERIC,
        Error::UnknownExperiment(_) => exit::UNKNOWN_EXPERIMENT,
    }
}

/// Runs the configured experiment and returns its report.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut report = match cfg.experiment {
        ExperimentKind::Dkw => dkw::run(cfg),
        ExperimentKind::Upper => upper::run(cfg),
        ExperimentKind::LowerPipeline => lower::run_pipeline(cfg),
        ExperimentKind::BoxLower => lower::run_box(cfg),
        ExperimentKind::Sandwich => sandwich::run_sandwich(cfg),
        ExperimentKind::Dominance => sandwich::run_dominance(cfg),
        ExperimentKind::ReorderingOracle => oracle::run(cfg),
    }?;
    report.wall_clock = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Runs the experiment, writes the report (atomically to `cfg.out`, or to
/// standard output) and returns the exit code.
pub fn run(cfg: &ExperimentConfig) -> Result<i32> {
    let report = execute(cfg)?;
    let text = report.render(cfg.format)?;
    match &cfg.out {
        Some(path) => report::write_atomic(path, &text)?,
        None => print!("{text}"),
    }
    Ok(if report.pass {
        exit::PASS
    } else {
        exit::BOUND_VIOLATION
    })
}

/// Order-preserving map, on a dedicated pool when `threads > 1`.
pub(crate) fn par_map<T, U, F>(threads: usize, items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    if threads <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}
