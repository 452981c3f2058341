//! Gaussian mass of `Gamma_n` and its inclusion in `E_n(delta_n)`.

use serde::Serialize;

use super::config::ExperimentConfig;
use super::report::{ExperimentReport, Margin};
use crate::error::{Error, Result};
use crate::gaussian;
use crate::measures::{
    gamma_n_thresholds, sorted_in_gamma_n, wasserstein_to_gaussian, DiscreteMeasure,
};
use crate::sampling::{self, Estimate};

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    in_gamma: u64,
    in_e_n: u64,
    inclusion_violations: u64,
    max_w_in_gamma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DkwRow {
    pub n: usize,
    pub samples: usize,
    pub delta_n: f64,
    pub ks_cap: f64,
    pub box_cap: f64,
    pub gamma_mass: Estimate,
    pub e_n_mass: Estimate,
    pub failures: u64,
    /// `samples * (2/n^2 + 2 n (1 - Phi(2 sqrt(log n))))`.
    pub expected_failures: f64,
    pub inclusion_violations: u64,
    pub max_w_in_gamma: f64,
}

/// Per-sample probability of leaving `Gamma_n`: the DKW tail plus a union
/// bound over coordinates for the box.
pub fn gamma_failure_bound(n: usize) -> f64 {
    let nf = n as f64;
    let (_, box_cap) = gamma_n_thresholds(n);
    2.0 / (nf * nf) + nf * 2.0 * gaussian::sf(box_cap)
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = cfg.n;
    if n < 100 {
        return Err(Error::config(format!("dkw needs n >= 100, got {n}")));
    }
    let delta = cfg.delta.resolve(n);
    let tallies = sampling::sharded(cfg.samples, cfg.seed, 0, cfg.threads, |rng, _, len| {
        let mut t = Tally::default();
        for _ in 0..len {
            let mut s = sampling::standard_normal_vec(rng, n);
            s.sort_by(|a, b| a.total_cmp(b));
            let gamma = sorted_in_gamma_n(&s);
            let w = wasserstein_to_gaussian(&DiscreteMeasure::from_sorted_uniform(s));
            let e = w <= delta;
            t.in_gamma += gamma as u64;
            t.in_e_n += e as u64;
            if gamma {
                t.max_w_in_gamma = t.max_w_in_gamma.max(w);
                t.inclusion_violations += !e as u64;
            }
        }
        t
    })?;
    let total = tallies.iter().fold(Tally::default(), |a, b| Tally {
        in_gamma: a.in_gamma + b.in_gamma,
        in_e_n: a.in_e_n + b.in_e_n,
        inclusion_violations: a.inclusion_violations + b.inclusion_violations,
        max_w_in_gamma: a.max_w_in_gamma.max(b.max_w_in_gamma),
    });
    let samples = cfg.samples as u64;
    let q = gamma_failure_bound(n);
    let (ks_cap, box_cap) = gamma_n_thresholds(n);
    let row = DkwRow {
        n,
        samples: cfg.samples,
        delta_n: delta,
        ks_cap,
        box_cap,
        gamma_mass: Estimate::proportion(total.in_gamma, samples),
        e_n_mass: Estimate::proportion(total.in_e_n, samples),
        failures: samples - total.in_gamma,
        expected_failures: cfg.samples as f64 * q,
        inclusion_violations: total.inclusion_violations,
        max_w_in_gamma: total.max_w_in_gamma,
    };
    let allowance = row.expected_failures + 4.0 * (cfg.samples as f64 * q).sqrt() + 1.0;
    let mut report = ExperimentReport::new(cfg);
    report.assert(Margin::le("gamma_failures", row.failures as f64, allowance));
    report.assert(Margin::le(
        "inclusion_violations",
        row.inclusion_violations as f64,
        0.0,
    ));
    report.assert(Margin::le(
        "max_w_in_gamma_vs_delta_n",
        row.max_w_in_gamma,
        delta,
    ));
    report.push_row(row);
    Ok(report)
}
