//! Lower-bound experiments: the box-product Monte Carlo estimate and the
//! constructive reordering pipeline that realises it on a single vector.

use serde::Serialize;

use super::config::ExperimentConfig;
use super::par_map;
use super::report::{ExperimentReport, Margin};
use crate::bounds::{best_of, box_lower_bound_grid, BoxLowerBound};
use crate::couplings::{push_vector, sample_uniform_snb, IndexBlock};
use crate::error::{Error, Result};
use crate::gaussian::TailModel;
use crate::measures::{
    exceedance_of, gaussian_quantile_grid, wasserstein_to_gaussian, SortedSample,
};
use crate::sampling::stream_rng;

#[derive(Debug, Clone, Serialize)]
pub struct PipelineRow {
    pub n: usize,
    pub d: usize,
    pub rho: f64,
    /// Size of the top index block, `round((p_1 - rho) n)`.
    pub block: usize,
    pub exceedance: f64,
    /// `p_1 - (1 + kappa/2) rho - 2 exp(d I_{x0}(rho) / 2)`.
    pub floor: f64,
    pub mean_gap: f64,
    pub w_to_gaussian: f64,
}

/// Averages `d` reorderings of the Gaussian quantile grid that all send the
/// top block of slots to the top `round((p_1 - rho) n)` indices, for each
/// `rho` of the grid.
pub fn pipeline_rows(
    n: usize,
    d: usize,
    rho_grid: &[f64],
    seed: u64,
    threads: usize,
) -> Result<Vec<PipelineRow>> {
    let model = TailModel::new();
    let p1 = model.p1();
    let min_rho = rho_grid.iter().copied().fold(f64::INFINITY, f64::min);
    if d as f64 > n as f64 * min_rho {
        return Err(Error::config(format!(
            "need d <= n min(rho), got d = {d}, n = {n}, min rho = {min_rho}"
        )));
    }
    if let Some(r) = rho_grid.iter().find(|&&r| !(r > 0.0 && r < 0.5 * p1)) {
        return Err(Error::config(format!("rho = {r} outside (0, p_1/2)")));
    }
    let t = SortedSample::from_sorted(gaussian_quantile_grid(n))?;
    let w_t = wasserstein_to_gaussian(&t.measure());
    let mean_t = t.mean();
    let indexed: Vec<(usize, f64)> = rho_grid.iter().copied().enumerate().collect();
    par_map(threads, &indexed, |&(i, rho)| {
        let m = ((p1 - rho) * n as f64).round() as usize;
        if m < d || m > n {
            return Err(Error::config(format!(
                "block size {m} for rho = {rho} not in [d, n] = [{d}, {n}]"
            )));
        }
        let block = IndexBlock::top(n, m)?;
        let mut rng = stream_rng(seed, i as u64);
        let perms: Vec<_> = (0..d)
            .map(|_| sample_uniform_snb(&block, &mut rng))
            .collect();
        let u = push_vector(&t, &perms)?;
        let mean_u = u.iter().sum::<f64>() / n as f64;
        let rate = model.rate_function(model.x0, rho)?.value;
        Ok(PipelineRow {
            n,
            d,
            rho,
            block: m,
            exceedance: exceedance_of(&u, 1.0),
            floor: p1 - (1.0 + 0.5 * model.kappa) * rho - 2.0 * (0.5 * d as f64 * rate).exp(),
            mean_gap: (mean_u - mean_t).abs(),
            w_to_gaussian: w_t,
        })
    })?
    .into_iter()
    .collect()
}

pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let n = cfg.n;
    if n < 10_000 {
        return Err(Error::config(format!(
            "lower-pipeline needs n >= 10000, got {n}"
        )));
    }
    let p1 = TailModel::new().p1();
    let mut report = ExperimentReport::new(cfg);
    for (j, &d) in cfg.d.iter().enumerate() {
        let rows = pipeline_rows(
            n,
            d,
            &cfg.rho_grid,
            cfg.seed.wrapping_add(j as u64),
            cfg.threads,
        )?;
        for r in &rows {
            let tag = format!("d={d}, rho={:.5}", r.rho);
            report.assert(Margin::le(
                format!("{tag}: mean preserved"),
                r.mean_gap,
                1e-12,
            ));
            report.assert(Margin::le(
                format!("{tag}: exceedance <= p_1 + 1/n"),
                r.exceedance,
                p1 + 1.0 / n as f64,
            ));
            report.assert(Margin::le(
                format!("{tag}: floor <= exceedance"),
                r.floor,
                r.exceedance,
            ));
        }
        let best = rows
            .iter()
            .max_by(|a, b| a.exceedance.total_cmp(&b.exceedance))
            .expect("grid is nonempty");
        report.note(format!(
            "d={d}: best rho {:.5} gives exceedance {:.6} (p_1 = {p1:.6})",
            best.rho, best.exceedance
        ));
        rows.into_iter().for_each(|r| report.push_row(r));
    }
    report.note("u is the average of reorderings of t, so it lies in every convex set containing all reorderings of t");
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxRow {
    pub best: BoxLowerBound,
    pub grid: Vec<BoxLowerBound>,
}

pub fn run_box(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let p1 = TailModel::new().p1();
    let mut report = ExperimentReport::new(cfg);
    let mut previous: Option<BoxLowerBound> = None;
    for (j, &d) in cfg.d.iter().enumerate() {
        let grid = box_lower_bound_grid(
            d,
            &cfg.rho_grid,
            cfg.samples,
            cfg.seed.wrapping_add(j as u64),
            cfg.threads,
        )?;
        for g in &grid {
            let tag = format!("d={d}, rho={:.5}", g.rho);
            report.assert(Margin::le(
                format!("{tag}: floor <= estimate + 4 stderr"),
                g.floor,
                g.estimate.value + 4.0 * g.estimate.stderr,
            ));
            report.assert(Margin::le(
                format!("{tag}: estimate - 4 stderr <= p_1"),
                g.estimate.value - 4.0 * g.estimate.stderr,
                p1,
            ));
        }
        let best = *best_of(&grid).expect("grid is nonempty");
        if let Some(prev) = previous {
            let slack = 2.0 * prev.estimate.stderr.max(best.estimate.stderr);
            report.assert(Margin::le(
                format!("d={}..{d}: best estimate nondecreasing", prev.d),
                prev.estimate.value - slack,
                best.estimate.value,
            ));
        }
        previous = Some(best);
        report.push_row(BoxRow { best, grid });
    }
    Ok(report)
}
