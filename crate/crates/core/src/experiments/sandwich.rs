//! Upper certificate versus box-product lower estimate, per arity, and the
//! dominance of the certificate over concrete coupling families.

use serde::Serialize;

use super::config::ExperimentConfig;
use super::report::{ExperimentReport, Margin};
use crate::bounds::{
    coupled_exceedance, equal_weights, refined_certificate, sandwich_row, CouplingFamily,
    SandwichRow,
};
use crate::error::Result;
use crate::gaussian::TailModel;
use crate::sampling::{random_simplex, stream_rng, Estimate};

pub fn run_sandwich(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p1 = TailModel::new().p1();
    let mut report = ExperimentReport::new(cfg);
    let mut previous: Option<SandwichRow> = None;
    for (j, &k) in cfg.k.iter().enumerate() {
        let row = sandwich_row(
            k,
            &cfg.rho_grid,
            cfg.samples,
            cfg.seed.wrapping_add(j as u64),
            cfg.threads,
        )?;
        report.assert(Margin::le(
            format!("k={k}: lower - 4 stderr <= upper"),
            row.lower.value - 4.0 * row.lower.stderr,
            row.upper,
        ));
        report.assert(Margin::lt_with_gap(
            format!("k={k}: upper < p_1"),
            row.upper,
            p1,
            row.upper_gain,
        ));
        report.assert(Margin::le(
            format!("k={k}: floor <= lower + 4 stderr"),
            row.floor,
            row.lower.value + 4.0 * row.lower.stderr,
        ));
        if let Some(prev) = previous {
            report.assert(Margin::le(
                format!("k={}..{k}: upper nondecreasing", prev.k),
                prev.upper,
                row.upper,
            ));
            report.assert(Margin::le(
                format!("k={}..{k}: log gain nonincreasing", prev.k),
                row.log_upper_gain,
                prev.log_upper_gain,
            ));
        }
        previous = Some(row);
        report.push_row(row);
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceRow {
    pub family: String,
    pub k: usize,
    pub weights: Vec<f64>,
    pub equal_weights: bool,
    pub estimate: Estimate,
    pub bound: f64,
}

/// Families probed by the dominance experiment; `n` is the degree of the
/// random permutation coupling.
pub fn dominance_families(n: usize) -> Vec<CouplingFamily> {
    vec![
        CouplingFamily::Independent,
        CouplingFamily::Comonotone,
        CouplingFamily::BoxProduct { rho: 0.05 },
        CouplingFamily::BoxProduct { rho: 0.1 },
        CouplingFamily::BoxProduct { rho: 0.2 },
        CouplingFamily::Permutation { n },
    ]
}

/// Monte Carlo exceedance at `w = 1` for every family, arity and weight
/// choice (equal and one random simplex point).
pub fn dominance_rows(
    families: &[CouplingFamily],
    ks: &[usize],
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<DominanceRow>> {
    let mut rows = Vec::new();
    let mut stream = 0u64;
    for &k in ks {
        let mut rng = stream_rng(seed, u64::MAX - k as u64);
        let choices = [
            (equal_weights(k), true),
            (random_simplex(&mut rng, k), false),
        ];
        for (weights, equal) in &choices {
            let bound = refined_certificate(1.0, weights)?.bound;
            for family in families {
                let estimate = coupled_exceedance(
                    *family,
                    weights,
                    1.0,
                    samples,
                    seed.wrapping_add(stream),
                    threads,
                )?;
                stream += 1;
                rows.push(DominanceRow {
                    family: family.label(),
                    k,
                    weights: weights.clone(),
                    equal_weights: *equal,
                    estimate,
                    bound,
                });
            }
        }
    }
    Ok(rows)
}

pub fn run_dominance(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let rows = dominance_rows(
        &dominance_families(cfg.n),
        &cfg.k,
        cfg.samples,
        cfg.seed,
        cfg.threads,
    )?;
    let mut report = ExperimentReport::new(cfg);
    for r in rows {
        let kind = if r.equal_weights { "equal" } else { "random" };
        report.assert(Margin::le(
            format!(
                "{} k={} {kind} weights: estimate <= bound + 4 stderr",
                r.family, r.k
            ),
            r.estimate.value,
            r.bound + 4.0 * r.estimate.stderr,
        ));
        report.push_row(r);
    }
    Ok(report)
}
