//! Exhaustive reordering counts for small `n`.

use rand::Rng;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::report::{ExperimentReport, Margin};
use crate::couplings::{all_permutations, Permutation};
use crate::error::{Error, Result};
use crate::gaussian;
use crate::measures::{decompose, SortedSample};
use crate::sampling::{self, stream_rng, Estimate};

pub const MAX_DEGREE: usize = 8;

/// `{x : <normal, x> >= offset}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn contains(&self, x: &[f64]) -> bool {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() >= self.offset
    }

    /// Standard Gaussian measure, `1 - Phi(offset / |normal|)`.
    pub fn gaussian_mass(&self) -> f64 {
        let norm = self.normal.iter().map(|a| a * a).sum::<f64>().sqrt();
        gaussian::sf(self.offset / norm)
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        HalfSpace {
            normal: sampling::standard_normal_vec(rng, n),
            offset: rng.random::<f64>() * 2.0 - 1.0,
        }
    }
}

/// `N(t, J)` and `N_B(t, J)` for every block of size `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReorderingCounts {
    pub n: usize,
    pub m: usize,
    pub total: u64,
    /// `(block, N_B)` for every `B` with `|B| = m`, blocks in increasing
    /// bitmask order.
    pub by_block: Vec<(Vec<usize>, u64)>,
}

impl ReorderingCounts {
    pub fn block_sum(&self) -> u64 {
        self.by_block.iter().map(|(_, c)| c).sum()
    }

    pub fn max_block(&self) -> u64 {
        self.by_block.iter().map(|&(_, c)| c).max().unwrap_or(0)
    }

    /// `max_B N_B >= m!(n-m)! N / n!`, i.e. `max_B N_B * C(n, m) >= N`.
    pub fn pigeonhole_holds(&self) -> bool {
        self.max_block() as u128 * binomial(self.n, self.m) >= self.total as u128
    }
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

pub fn binomial(n: usize, m: usize) -> u128 {
    factorial(n) / (factorial(m) * factorial(n - m))
}

/// Enumerates all `n!` reorderings `sigma t` and counts those in `J`, in
/// total and split by the block `B = sigma(top m slots)`.
pub fn reordering_counts<J>(t: &SortedSample, m: usize, region: J) -> Result<ReorderingCounts>
where
    J: Fn(&[f64]) -> bool,
{
    let n = t.len();
    if n > MAX_DEGREE {
        return Err(Error::domain(format!(
            "enumeration limited to n <= {MAX_DEGREE}, got {n}"
        )));
    }
    if m > n {
        return Err(Error::domain(format!("block size {m} exceeds n = {n}")));
    }
    let mut counts = vec![0u64; 1 << n];
    let mut total = 0;
    for sigma in all_permutations(n) {
        if region(&sigma.apply(&t.atoms)?) {
            total += 1;
            counts[block_mask(&sigma, m)] += 1;
        }
    }
    let by_block = (0usize..1 << n)
        .filter(|mask| mask.count_ones() as usize == m)
        .map(|mask| {
            (
                (0..n).filter(|b| mask & (1 << b) != 0).collect(),
                counts[mask],
            )
        })
        .collect();
    Ok(ReorderingCounts {
        n,
        m,
        total,
        by_block,
    })
}

fn block_mask(sigma: &Permutation, m: usize) -> usize {
    let n = sigma.degree();
    sigma.as_slice()[n - m..]
        .iter()
        .fold(0, |acc, &j| acc | (1 << j))
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub region: String,
    pub n: usize,
    pub m: usize,
    pub total: u64,
    pub block_sum: u64,
    pub blocks: usize,
    pub max_block: u64,
    pub pigeonhole: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryRow {
    pub n: usize,
    pub samples: usize,
    /// Monte Carlo mean of `N(sort(s), J) / n!` over Gaussian `s`.
    pub mean_fraction: Estimate,
    pub gaussian_mass: f64,
    /// Largest `N(t, J)` over the sampled `t`, against `gamma_n(J) n!`.
    pub max_count: u64,
    pub mass_times_factorial: f64,
}

pub const RANDOM_REGIONS: usize = 5;

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let (n, m) = (cfg.n, cfg.m);
    if n > MAX_DEGREE {
        return Err(Error::config(format!(
            "reordering-oracle needs n <= {MAX_DEGREE}, got {n}"
        )));
    }
    if m > n {
        return Err(Error::config(format!("block size {m} exceeds n = {n}")));
    }
    let mut rng = stream_rng(cfg.seed, 0);
    let t = decompose(&sampling::standard_normal_vec(&mut rng, n))?;
    let mut report = ExperimentReport::new(cfg);
    let push = |report: &mut ExperimentReport, label: String, c: ReorderingCounts| {
        report.assert(Margin::le(
            format!("{label}: |sum_B N_B - N|"),
            c.block_sum().abs_diff(c.total) as f64,
            0.0,
        ));
        report.assert(Margin::le(
            format!("{label}: pigeonhole N <= C(n,m) max_B N_B"),
            c.total as f64,
            (c.max_block() as u128 * binomial(n, m)) as f64,
        ));
        report.push_row(OracleRow {
            region: label,
            n,
            m,
            total: c.total,
            block_sum: c.block_sum(),
            blocks: c.by_block.len(),
            max_block: c.max_block(),
            pigeonhole: c.pigeonhole_holds(),
        });
    };
    let all = reordering_counts(&t, m, |_| true)?;
    let per_block = (factorial(m) * factorial(n - m)) as u64;
    report.assert(Margin::le(
        "whole space: N = n!",
        all.total.abs_diff(factorial(n) as u64) as f64,
        0.0,
    ));
    report.assert(Margin::le(
        "whole space: every N_B = m!(n-m)!",
        all.by_block
            .iter()
            .map(|(_, c)| c.abs_diff(per_block))
            .max()
            .unwrap_or(0) as f64,
        0.0,
    ));
    push(&mut report, "whole space".into(), all);
    let empty = reordering_counts(&t, m, |_| false)?;
    report.assert(Margin::le(
        "empty set: all counts zero",
        empty.total as f64,
        0.0,
    ));
    push(&mut report, "empty set".into(), empty);
    let mut regions = Vec::new();
    for i in 0..RANDOM_REGIONS {
        let h = HalfSpace::random(n, &mut rng);
        let c = reordering_counts(&t, m, |x| h.contains(x))?;
        push(&mut report, format!("half-space {i}"), c);
        regions.push(h);
    }
    let sym = symmetry_check(&regions[0], n, cfg.samples, cfg.seed, cfg.threads)?;
    report.assert(Margin::le(
        "E[N(t,J)]/n! matches gaussian mass within 4 stderr",
        (sym.mean_fraction.value - sym.gaussian_mass).abs(),
        4.0 * sym.mean_fraction.stderr,
    ));
    report.assert(Margin::le(
        "some sampled t has N(t,J) >= gamma_n(J) n!",
        sym.mass_times_factorial,
        sym.max_count as f64,
    ));
    report.push_row(sym);
    Ok(report)
}

/// Checks that `N(t, J) / n!` averages to `gamma_n(J)` when `t` is the
/// sorted image of a standard Gaussian vector.
pub fn symmetry_check(
    region: &HalfSpace,
    n: usize,
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<SymmetryRow> {
    let nf = factorial(n) as f64;
    let parts = sampling::sharded(samples, seed, 1 << 32, threads, |rng, _, len| {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut max_count = 0u64;
        for _ in 0..len {
            let t = decompose(&sampling::standard_normal_vec(rng, n))?;
            let c = reordering_counts(&t, 0, |x| region.contains(x))?.total;
            let f = c as f64 / nf;
            sum += f;
            sum_sq += f * f;
            max_count = max_count.max(c);
        }
        Ok::<_, Error>((sum, sum_sq, max_count))
    })?;
    let (mut sum, mut sum_sq, mut max_count) = (0.0, 0.0, 0);
    for p in parts {
        let (s, s2, mc) = p?;
        sum += s;
        sum_sq += s2;
        max_count = max_count.max(mc);
    }
    let count = samples as f64;
    let mean = sum / count;
    let var = (sum_sq / count - mean * mean).max(0.0);
    let mass = region.gaussian_mass();
    Ok(SymmetryRow {
        n,
        samples,
        mean_fraction: Estimate::new(mean, (var / count).sqrt()),
        gaussian_mass: mass,
        max_count,
        mass_times_factorial: mass * nf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_space_counts() {
        let t = SortedSample::from_sorted(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let c = reordering_counts(&t, 2, |_| true).unwrap();
        assert_eq!(c.total, 24);
        assert_eq!(c.by_block.len(), 6);
        assert!(c.by_block.iter().all(|(_, n)| *n == 4));
        let e = reordering_counts(&t, 2, |_| false).unwrap();
        assert_eq!(e.total, 0);
        assert!(e.pigeonhole_holds());
    }

    #[test]
    fn rejects_large_degree() {
        let t = SortedSample::from_sorted((0..9).map(f64::from).collect()).unwrap();
        assert!(reordering_counts(&t, 2, |_| true).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(8, 0), 1);
        assert_eq!(factorial(8), 40320);
    }
}
