//! Empirical coordinate measures and 1-D transport distances.
//!
//! A vector `s` in `R^n` corresponds to the pair of its sorted coordinates
//! (an element of the cone of nondecreasing vectors) and the permutation that
//! sorts it. Distances between measures are computed through the quantile
//! and distribution-function forms of the Wasserstein-1 distance.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::gaussian::{self, cdf, tail_integral};
use crate::sampling::{self, Estimate};

/// Sorted coordinates of a vector together with its ordering permutation.
///
/// `ordering[slot]` is the (0-based) index of the coordinate that lands in
/// `slot` after sorting, so `atoms[slot] == s[ordering[slot]]`. Equal
/// coordinates keep their original relative order.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    pub atoms: Vec<f64>,
    pub ordering: Vec<usize>,
}

pub fn decompose(s: &[f64]) -> Result<SortedSample> {
    if s.is_empty() {
        return Err(Error::domain("cannot decompose an empty vector"));
    }
    if let Some(j) = s.iter().position(|x| !x.is_finite()) {
        return Err(Error::domain(format!("coordinate {j} is not finite")));
    }
    let mut ordering: Vec<usize> = (0..s.len()).collect();
    // Stable sort: ties keep index order.
    ordering.sort_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap_or(Ordering::Equal));
    let atoms = ordering.iter().map(|&j| s[j]).collect();
    Ok(SortedSample { atoms, ordering })
}

impl SortedSample {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Wraps an already nondecreasing vector, with identity ordering.
    pub fn from_sorted(atoms: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("empty sample"));
        }
        if atoms.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::domain("atoms are not nondecreasing"));
        }
        let ordering = (0..atoms.len()).collect();
        Ok(SortedSample { atoms, ordering })
    }

    /// Inverts [`decompose`].
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.atoms.len()];
        for (slot, &j) in self.ordering.iter().enumerate() {
            s[j] = self.atoms[slot];
        }
        s
    }

    pub fn measure(&self) -> DiscreteMeasure {
        DiscreteMeasure::from_sorted_uniform(self.atoms.clone())
    }

    /// Fraction of atoms `>= w`.
    pub fn exceedance(&self, w: f64) -> f64 {
        let below = self.atoms.partition_point(|&x| x < w);
        (self.atoms.len() - below) as f64 / self.atoms.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().sum::<f64>() / self.atoms.len() as f64
    }
}

/// The standard Gaussian quantile grid `Phi^{-1}((j - 1/2)/n)`, `j = 1..n`.
pub fn gaussian_quantile_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| gaussian::quantile_unchecked((j as f64 + 0.5) / n as f64))
        .collect()
}

/// Finitely supported probability measure, atoms kept in nondecreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl DiscreteMeasure {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("measure needs at least one atom"));
        }
        if atoms.len() != weights.len() {
            return Err(Error::domain(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::domain("atoms must be finite"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::domain("weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::domain(format!("weights sum to {total}, not 1")));
        }
        let mut pairs: Vec<(f64, f64)> = atoms.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let (atoms, weights) = pairs.into_iter().unzip();
        Ok(DiscreteMeasure { atoms, weights })
    }

    /// Uniform measure on the given atoms (repetitions allowed).
    pub fn uniform(mut atoms: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("measure needs at least one atom"));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::domain("atoms must be finite"));
        }
        atoms.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        Ok(Self::from_sorted_uniform(atoms))
    }

    pub fn dirac(a: f64) -> Result<Self> {
        Self::new(vec![a], vec![1.0])
    }

    pub(crate) fn from_sorted_uniform(atoms: Vec<f64>) -> Self {
        let w = 1.0 / atoms.len() as f64;
        let weights = vec![w; atoms.len()];
        DiscreteMeasure { atoms, weights }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| a * w)
            .sum()
    }

    /// Merges repeated atoms: distinct atoms with cumulative weights
    /// `F(atom)` (the last cumulative level is pinned to 1).
    fn distinct_levels(&self) -> (Vec<f64>, Vec<f64>) {
        let mut xs: Vec<f64> = Vec::with_capacity(self.atoms.len());
        let mut cum: Vec<f64> = Vec::with_capacity(self.atoms.len());
        let mut running = 0.0;
        for (&a, &w) in self.atoms.iter().zip(&self.weights) {
            running += w;
            match xs.last() {
                Some(&last) if last == a => *cum.last_mut().unwrap() = running,
                _ => {
                    xs.push(a);
                    cum.push(running);
                }
            }
        }
        if let Some(last) = cum.last_mut() {
            *last = 1.0;
        }
        (xs, cum)
    }

    /// Same measure after merging repeated atoms and dropping null weights.
    pub fn canonical(&self) -> DiscreteMeasure {
        let (xs, cum) = self.distinct_levels();
        let mut atoms = Vec::with_capacity(xs.len());
        let mut weights = Vec::with_capacity(xs.len());
        let mut prev = 0.0;
        for (x, c) in xs.into_iter().zip(cum) {
            if c - prev > 0.0 {
                atoms.push(x);
                weights.push(c - prev);
            }
            prev = c;
        }
        DiscreteMeasure { atoms, weights }
    }

    /// `mu([w, inf))`; atoms exactly at `w` count.
    pub fn exceedance(&self, w: f64) -> f64 {
        let start = self.atoms.partition_point(|&x| x < w);
        self.weights[start..].iter().sum::<f64>().min(1.0)
    }

    /// Shifts every atom by `c`.
    pub fn shifted(&self, c: f64) -> DiscreteMeasure {
        DiscreteMeasure {
            atoms: self.atoms.iter().map(|a| a + c).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// Wasserstein-1 distance between two discrete measures via the quantile
/// form: the integral over `(0,1)` of `|Q_nu(r) - Q_mu(r)|`, evaluated on the
/// merged partition of cumulative-weight breakpoints.
pub fn wasserstein_1(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let (a, ca) = mu.distinct_levels();
    let (b, cb) = nu.distinct_levels();
    let (mut i, mut j) = (0, 0);
    let mut prev = 0.0;
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let next = ca[i].min(cb[j]);
        total += (next - prev) * (a[i] - b[j]).abs();
        prev = next;
        if ca[i] <= next {
            i += 1;
        }
        if cb[j] <= next {
            j += 1;
        }
    }
    total
}

/// Mean absolute difference of two sorted samples of equal length, the
/// uniform-measure special case of [`wasserstein_1`].
pub fn wasserstein_sorted(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::domain(
            "sorted samples must be nonempty and of equal length",
        ));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// `integral over [l, r] of Phi`, using `integral_{-inf}^x Phi = T(-x)` on the
/// left half-line and `integral_x^inf (1 - Phi) = T(x)` on the right.
fn integral_cdf(l: f64, r: f64) -> f64 {
    if r <= l {
        return 0.0;
    }
    if r <= 0.0 {
        tail_integral(-r) - tail_integral(-l)
    } else if l >= 0.0 {
        (r - l) - (tail_integral(l) - tail_integral(r))
    } else {
        integral_cdf(l, 0.0) + integral_cdf(0.0, r)
    }
}

/// `integral over [l, r] of |c - Phi(x)|`.
fn integral_abs_gap(l: f64, r: f64, c: f64) -> f64 {
    let cross = if c <= 0.0 {
        f64::NEG_INFINITY
    } else if c >= 1.0 {
        f64::INFINITY
    } else {
        gaussian::quantile_unchecked(c)
    };
    let m = cross.clamp(l, r);
    // Phi < c on [l, m), Phi > c on (m, r].
    let below = c * (m - l) - integral_cdf(l, m);
    let above = integral_cdf(m, r) - c * (r - m);
    below + above
}

/// Exact `W(mu, gamma) = integral of |F_mu(x) - Phi(x)| dx`.
pub fn wasserstein_to_gaussian(mu: &DiscreteMeasure) -> f64 {
    let (xs, cum) = mu.distinct_levels();
    let first = xs[0];
    let last = xs[xs.len() - 1];
    // Left of the support F = 0; right of it F = 1.
    let mut total = tail_integral(-first) + tail_integral(last);
    for k in 0..xs.len() - 1 {
        total += integral_abs_gap(xs[k], xs[k + 1], cum[k]);
    }
    total
}

/// `mu_s([w, inf))` for a vector: the fraction of coordinates `>= w`.
pub fn exceedance_of(s: &[f64], w: f64) -> f64 {
    s.iter().filter(|&&x| x >= w).count() as f64 / s.len() as f64
}

/// Kolmogorov-Smirnov distance `sup |F_s - Phi|` of a vector's empirical
/// measure, checked on both sides of every jump.
pub fn ks_distance(s: &[f64]) -> Result<f64> {
    let sorted = decompose(s)?;
    Ok(ks_distance_sorted(&sorted.atoms))
}

pub fn ks_distance_sorted(atoms: &[f64]) -> f64 {
    let n = atoms.len() as f64;
    let mut sup: f64 = 0.0;
    let mut k = 0;
    while k < atoms.len() {
        let v = atoms[k];
        let mut end = k + 1;
        while end < atoms.len() && atoms[end] == v {
            end += 1;
        }
        let phi = cdf(v);
        let left = k as f64 / n;
        let right = end as f64 / n;
        sup = sup.max((left - phi).abs()).max((right - phi).abs());
        k = end;
    }
    sup
}

/// How `delta_n` is chosen for `E_n(delta_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaRule {
    /// `c log(n) / sqrt(n)`.
    LogOverRoot { c: f64 },
    /// `c n^{-1/3}`.
    CubeRoot { c: f64 },
}

impl Default for DeltaRule {
    fn default() -> Self {
        DeltaRule::LogOverRoot { c: 3.0 }
    }
}

impl DeltaRule {
    pub fn delta(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            DeltaRule::LogOverRoot { c } => c * nf.ln() / nf.sqrt(),
            DeltaRule::CubeRoot { c } => c * nf.powf(-1.0 / 3.0),
        }
    }
}

/// Empirical coordinate measure of `s`.
pub fn empirical_measure(s: &[f64]) -> Result<DiscreteMeasure> {
    Ok(decompose(s)?.measure())
}

/// `s` in `E_n(delta)`: `W(mu_s, gamma) <= delta`.
pub fn in_e_n(s: &[f64], delta: f64) -> Result<bool> {
    if !(delta >= 0.0) {
        return Err(Error::domain(format!("delta must be >= 0, got {delta}")));
    }
    Ok(wasserstein_to_gaussian(&empirical_measure(s)?) <= delta)
}

/// Thresholds of the high-probability set `Gamma_n`.
pub fn gamma_n_thresholds(n: usize) -> (f64, f64) {
    let ln = (n as f64).ln();
    ((ln / n as f64).sqrt(), 2.0 * ln.sqrt())
}

/// `s` in `Gamma_n`: KS distance at most `sqrt(log n / n)` and every
/// coordinate strictly inside `(-2 sqrt(log n), 2 sqrt(log n))`.
pub fn in_gamma_n(s: &[f64]) -> Result<bool> {
    let sorted = decompose(s)?;
    Ok(sorted_in_gamma_n(&sorted.atoms))
}

pub(crate) fn sorted_in_gamma_n(atoms: &[f64]) -> bool {
    let (ks_cap, box_cap) = gamma_n_thresholds(atoms.len());
    atoms[0].abs() < box_cap
        && atoms[atoms.len() - 1].abs() < box_cap
        && ks_distance_sorted(atoms) <= ks_cap
}

/// Monte Carlo estimate of the standard Gaussian measure of
/// `{s in R^n : predicate(s)}`.
pub fn gamma_mass_estimate<P>(
    predicate: P,
    n: usize,
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<Estimate>
where
    P: Fn(&[f64]) -> bool + Sync,
{
    if samples < 100 {
        return Err(Error::domain(format!(
            "need at least 100 samples, got {samples}"
        )));
    }
    if n == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    let hits = sampling::sharded(samples, seed, 0, threads, |rng, _, len| {
        (0..len)
            .filter(|_| predicate(&sampling::standard_normal_vec(rng, n)))
            .count() as u64
    })?;
    Ok(Estimate::proportion(hits.iter().sum(), samples as u64))
}
