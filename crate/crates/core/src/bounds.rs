//! Upper and lower bounds on the exceedance of a weighted sum of coupled
//! standard Gaussians.
//!
//! The upper side is a dual certificate: functions `f_i` with
//! `sum f_i(z_i) >= 1{sum lambda_i z_i >= w}` for every `z`, so that
//! `sum E f_i(Z)` bounds the exceedance under every coupling. The lower side
//! is the box-product coupling, estimated by Monte Carlo and backed by an
//! exact Chernoff floor.

use rand::Rng;
use serde::Serialize;

use crate::couplings::{BoxProductCoupling, Permutation, PermutationCoupling};
use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianThreshold, TailModel};
use crate::sampling::{self, random_simplex, stream_rng, Estimate, StreamRng};

/// Range of `w` on which certificate constants are known to be uniform.
pub const PROVEN_W_RANGE: (f64, f64) = (0.5, 1.5);
/// Range of `w` accepted by [`refined_certificate`].
pub const ACCEPTED_W_RANGE: (f64, f64) = (0.4, 2.0);

const SIMPLEX_TOL: f64 = 1e-10;

/// `p_w`: no coupling of any number of standard Gaussians has
/// `P(sum lambda_i Z_i >= w)` above this.
pub fn first_moment_bound(w: f64) -> Result<f64> {
    Ok(gaussian::solve_threshold(w)?.p_w)
}

/// `H(y) = E (1 + (Z - w)/(y + w))^+ = (y Phi(y) + phi(y)) / (y + w)`, the
/// bound given by the plain certificate. Minimised at `y = y_w`.
pub fn plain_certificate_h(y: f64, w: f64) -> Result<f64> {
    if !(y > -w) {
        return Err(Error::domain(format!(
            "H has a pole at y = -w; got y = {y}, w = {w}"
        )));
    }
    Ok((y * gaussian::cdf(y) + gaussian::pdf(y)) / (y + w))
}

/// Truncated dual certificate at threshold `w` with weights `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualCertificate {
    pub w: f64,
    pub weights: Vec<f64>,
    pub y_w: f64,
    pub p_w: f64,
    pub a_w: f64,
    /// `x_i = w + (1/lambda_i - 1)/a_w`; infinite for a zero weight.
    pub breakpoints: Vec<f64>,
    /// `lambda_i a_w T(x_i)`.
    pub gains: Vec<f64>,
    pub total_gain: f64,
    /// `ln(total_gain)`, accurate even when the gain is far below the
    /// resolution of `p_w`.
    pub log_total_gain: f64,
    /// `p_w - total_gain`.
    pub bound: f64,
    /// `w` lies outside the range where the constants are known to be uniform.
    pub extended_range: bool,
}

/// Builds the truncated certificate `f_i(z) = min(lambda_i g(z)^+, 1)`,
/// `g(z) = 1 + a_w (z - w)`, and its exact bound `p_w - sum_i gains`.
pub fn refined_certificate(w: f64, weights: &[f64]) -> Result<DualCertificate> {
    let (lo, hi) = ACCEPTED_W_RANGE;
    if !(lo..=hi).contains(&w) {
        return Err(Error::domain(format!(
            "w must lie in [{lo}, {hi}], got {w}"
        )));
    }
    check_simplex(weights)?;
    let GaussianThreshold { y_w, p_w, a_w, .. } = gaussian::solve_threshold(w)?;
    let mut breakpoints = Vec::with_capacity(weights.len());
    let mut gains = Vec::with_capacity(weights.len());
    let mut log_gains = Vec::with_capacity(weights.len());
    for &l in weights {
        if l == 0.0 {
            breakpoints.push(f64::INFINITY);
            gains.push(0.0);
            continue;
        }
        let x = w + (1.0 / l - 1.0) / a_w;
        let log_gain = l.ln() + a_w.ln() + gaussian::ln_tail_integral(x);
        breakpoints.push(x);
        gains.push(log_gain.exp());
        log_gains.push(log_gain);
    }
    let log_total_gain = log_sum_exp(&log_gains);
    let total_gain: f64 = gains.iter().sum();
    Ok(DualCertificate {
        w,
        weights: weights.to_vec(),
        y_w,
        p_w,
        a_w,
        breakpoints,
        gains,
        total_gain,
        log_total_gain,
        bound: p_w - total_gain,
        extended_range: !(PROVEN_W_RANGE.0..=PROVEN_W_RANGE.1).contains(&w),
    })
}

/// `(1/k, .., 1/k)`.
pub fn equal_weights(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}

fn check_simplex(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::domain("weight vector is empty"));
    }
    if weights
        .iter()
        .any(|&l| !(-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(&l))
    {
        return Err(Error::domain(format!("weights {weights:?} leave [0, 1]")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::domain(format!("weights sum to {total}, not 1")));
    }
    if weights.iter().any(|&l| l < 0.0) {
        return Err(Error::domain("negative weight"));
    }
    Ok(())
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

impl DualCertificate {
    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    /// `sum_i min(lambda_i g(z_i)^+, 1)`.
    pub fn evaluate(&self, z: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(z)
            .map(|(l, zi)| (l * (1.0 + self.a_w * (zi - self.w)).max(0.0)).min(1.0))
            .sum()
    }
}

/// Whether the certificate dominates the exceedance indicator at `z`, up to
/// floating rounding in the weighted sums.
pub fn check_feasibility(cert: &DualCertificate, z: &[f64]) -> Result<bool> {
    if z.len() != cert.arity() {
        return Err(Error::domain(format!(
            "point of length {} for certificate of arity {}",
            z.len(),
            cert.arity()
        )));
    }
    let combined: f64 = cert.weights.iter().zip(z).map(|(l, zi)| l * zi).sum();
    if combined < cert.w {
        return Ok(true);
    }
    let scale: f64 = cert
        .weights
        .iter()
        .zip(z)
        .map(|(l, zi)| (l * cert.a_w * zi).abs())
        .sum();
    let tol = 1e-12 * (1.0 + scale + cert.a_w * cert.w);
    Ok(cert.evaluate(z) >= 1.0 - tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FuzzReport {
    pub trials: usize,
    /// Trials where the exceedance event occurred.
    pub events: usize,
    pub violations: usize,
}

/// Checks feasibility at `trials` points: Gaussian draws, points on the
/// hyperplane `sum lambda_i z_i = w`, and points clustered at the
/// breakpoints `x_i` and at the kink `-y_w`.
pub fn fuzz_feasibility(cert: &DualCertificate, trials: usize, seed: u64) -> Result<FuzzReport> {
    let k = cert.arity();
    let mut rng = stream_rng(seed, 0);
    let mut z = vec![0.0; k];
    let mut report = FuzzReport {
        trials,
        events: 0,
        violations: 0,
    };
    for t in 0..trials {
        fuzz_point(cert, t % 4, &mut rng, &mut z);
        let combined: f64 = cert.weights.iter().zip(&z).map(|(l, zi)| l * zi).sum();
        if combined >= cert.w {
            report.events += 1;
        }
        if !check_feasibility(cert, &z)? {
            report.violations += 1;
        }
    }
    Ok(report)
}

fn fuzz_point(cert: &DualCertificate, mode: usize, rng: &mut StreamRng, z: &mut [f64]) {
    let jitter = |rng: &mut StreamRng| 1e-9 * (rng.random::<f64>() - 0.5);
    let kink = -cert.y_w;
    for (i, zi) in z.iter_mut().enumerate() {
        *zi = match mode {
            0 | 1 => 2.0 * gaussian::quantile_unchecked(sampling::open_unit(rng).min(1.0 - 1e-16)),
            2 => {
                let x = cert.breakpoints[i];
                if x.is_finite() && rng.random::<bool>() {
                    x + jitter(rng)
                } else {
                    kink + jitter(rng)
                }
            }
            _ => match rng.random_range(0..3) {
                0 => kink + jitter(rng),
                1 if cert.breakpoints[i].is_finite() => cert.breakpoints[i] + jitter(rng),
                _ => cert.w + rng.random::<f64>() * 4.0 - 2.0,
            },
        };
    }
    if mode == 1 || mode == 3 {
        // Project onto the hyperplane through the heaviest coordinate.
        let (j, &lj) = cert
            .weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let rest: f64 = cert
            .weights
            .iter()
            .zip(z.iter())
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, (l, zi))| l * zi)
            .sum();
        z[j] = (cert.w - rest) / lj + jitter(rng);
    }
}

/// `f(lambda) = sum_i lambda_i exp(-cexp / lambda_i^2)`.
pub fn lagrange_objective(weights: &[f64], cexp: f64) -> f64 {
    weights
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * (-cexp / (l * l)).exp())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagrangeMinimum {
    /// `exp(-cexp k^2)`, the value at equal weights.
    pub minimum: f64,
    /// Smallest objective seen over the random simplex sweep.
    pub swept_minimum: f64,
    pub trials: usize,
}

/// Minimum of [`lagrange_objective`] over the simplex, with a sweep of
/// `10^3` random simplex points as a check that none undercuts it.
pub fn equal_weights_minimum(k: usize, cexp: f64, seed: u64) -> Result<LagrangeMinimum> {
    if k == 0 {
        return Err(Error::domain("k must be positive"));
    }
    if !(cexp > 0.0) {
        return Err(Error::domain(format!(
            "exponent constant must be positive, got {cexp}"
        )));
    }
    let minimum = (-cexp * (k * k) as f64).exp();
    let trials = 1000;
    let mut rng = stream_rng(seed, 0);
    let swept_minimum = (0..trials)
        .map(|_| lagrange_objective(&random_simplex(&mut rng, k), cexp))
        .fold(f64::INFINITY, f64::min);
    Ok(LagrangeMinimum {
        minimum,
        swept_minimum,
        trials,
    })
}

/// Exceedance bound at `w = 1` for any `k`-fold convex combination of
/// vectors whose coordinate measures lie within `delta` of the Gaussian:
/// `sqrt(delta)` plus the equal-weight certificate at `1 - sqrt(delta)`.
pub fn conv_exceedance_bound(k: usize, delta: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("k must be positive"));
    }
    if !(0.0..=0.25).contains(&delta) {
        return Err(Error::domain(format!(
            "delta must lie in [0, 1/4], got {delta}"
        )));
    }
    let root = delta.sqrt();
    Ok(root + refined_certificate(1.0 - root, &equal_weights(k))?.bound)
}

/// One point of the box-product lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxLowerBound {
    pub d: usize,
    pub rho: f64,
    pub estimate: Estimate,
    /// `(p_1 - rho) max(0, 1 - exp(d I_{x0}(rho)))`.
    pub floor: f64,
}

/// Monte Carlo `P(d^{-1} sum Z_i >= 1)` under the box-product coupling with
/// upper mass `p_1 - rho`, and its Chernoff floor.
pub fn box_lower_bound(
    d: usize,
    rho: f64,
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<BoxLowerBound> {
    box_lower_bound_stream(d, rho, samples, seed, 0, threads)
}

fn box_lower_bound_stream(
    d: usize,
    rho: f64,
    samples: usize,
    seed: u64,
    stream_base: u64,
    threads: usize,
) -> Result<BoxLowerBound> {
    let model = TailModel::new();
    let p1 = model.p1();
    if !(rho > 0.0 && rho < 0.5 * p1) {
        return Err(Error::domain(format!(
            "rho must lie in (0, p_1/2), got {rho}"
        )));
    }
    if d == 0 || samples == 0 {
        return Err(Error::domain("d and samples must be positive"));
    }
    let coupling = BoxProductCoupling::with_upper_mass(p1 - rho, d)?;
    let hits = sampling::sharded(samples, seed, stream_base, threads, |rng, _, len| {
        let mut buf = vec![0.0; d];
        let mut hits = 0u64;
        for _ in 0..len {
            if rng.random::<f64>() >= coupling.p {
                // Lower block: every coordinate is below q < 1, so the mean
                // cannot reach 1.
                continue;
            }
            crate::couplings::sample_upper_tail(coupling.p, rng, &mut buf);
            if buf.iter().sum::<f64>() >= d as f64 {
                hits += 1;
            }
        }
        hits
    })?;
    let estimate = Estimate::proportion(hits.iter().sum(), samples as u64);
    let floor = (p1 - rho) * (1.0 - model.chernoff_bound(rho, d)?).max(0.0);
    Ok(BoxLowerBound {
        d,
        rho,
        estimate,
        floor,
    })
}

/// `count` points geometric in `[0.005, p_1/4]`.
pub fn default_rho_grid(count: usize) -> Vec<f64> {
    let lo: f64 = 0.005;
    let hi = 0.25 * TailModel::new().p1();
    if count <= 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| lo * ratio.powi(i as i32)).collect()
}

/// Box lower bound at every `rho` of the grid; each grid point uses its own
/// block of streams.
pub fn box_lower_bound_grid(
    d: usize,
    rho_grid: &[f64],
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<BoxLowerBound>> {
    if rho_grid.is_empty() {
        return Err(Error::domain("rho grid is empty"));
    }
    rho_grid
        .iter()
        .enumerate()
        .map(|(i, &rho)| box_lower_bound_stream(d, rho, samples, seed, (i as u64) << 32, threads))
        .collect()
}

/// Grid point with the largest estimate.
pub fn best_of(points: &[BoxLowerBound]) -> Option<&BoxLowerBound> {
    points
        .iter()
        .max_by(|a, b| a.estimate.value.total_cmp(&b.estimate.value))
}

/// Upper and lower bound on the supremal exceedance for arity `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichRow {
    pub k: usize,
    pub upper: f64,
    pub upper_gain: f64,
    pub log_upper_gain: f64,
    pub lower: Estimate,
    pub lower_rho: f64,
    /// Largest Chernoff floor over the grid.
    pub floor: f64,
}

impl SandwichRow {
    /// `lower - 4 stderr - upper`; nonpositive when the row is consistent.
    pub fn ordering_margin(&self) -> f64 {
        self.lower.value - 4.0 * self.lower.stderr - self.upper
    }
}

pub fn sandwich_row(
    k: usize,
    rho_grid: &[f64],
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<SandwichRow> {
    let cert = refined_certificate(1.0, &equal_weights(k))?;
    let points = box_lower_bound_grid(k, rho_grid, samples, seed, threads)?;
    let best = best_of(&points).expect("grid is nonempty");
    let floor = points.iter().map(|p| p.floor).fold(0.0, f64::max);
    Ok(SandwichRow {
        k,
        upper: cert.bound,
        upper_gain: cert.total_gain,
        log_upper_gain: cert.log_total_gain,
        lower: best.estimate,
        lower_rho: best.rho,
        floor,
    })
}

/// Couplings of `k` standard Gaussians used to probe the upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingFamily {
    Independent,
    Comonotone,
    /// Box product with upper mass `p_1 - rho`.
    BoxProduct {
        rho: f64,
    },
    /// Gaussian marginals pushed through `C^sigma` for a random tuple of
    /// degree `n`.
    Permutation {
        n: usize,
    },
}

impl CouplingFamily {
    pub fn label(&self) -> String {
        match self {
            CouplingFamily::Independent => "independent".into(),
            CouplingFamily::Comonotone => "comonotone".into(),
            CouplingFamily::BoxProduct { rho } => format!("box-product(rho={rho})"),
            CouplingFamily::Permutation { n } => format!("permutation(n={n})"),
        }
    }
}

/// Monte Carlo `P(sum lambda_i Z_i >= w)` with `Z` drawn from `family`.
pub fn coupled_exceedance(
    family: CouplingFamily,
    weights: &[f64],
    w: f64,
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<Estimate> {
    check_simplex(weights)?;
    if samples == 0 {
        return Err(Error::domain("samples must be positive"));
    }
    let k = weights.len();
    let boxed = match family {
        CouplingFamily::BoxProduct { rho } => Some(BoxProductCoupling::with_upper_mass(
            TailModel::new().p1() - rho,
            k,
        )?),
        _ => None,
    };
    let perm = match family {
        CouplingFamily::Permutation { n } => {
            if n == 0 {
                return Err(Error::domain("permutation degree must be positive"));
            }
            let mut rng = stream_rng(seed, u64::MAX);
            Some(PermutationCoupling::from_permutations(
                (0..k).map(|_| Permutation::random(n, &mut rng)).collect(),
            )?)
        }
        _ => None,
    };
    let hits = sampling::sharded(samples, seed, 0, threads, |rng, _, len| {
        let mut z = vec![0.0; k];
        let mut hits = 0u64;
        for _ in 0..len {
            match family {
                CouplingFamily::Independent => {
                    z.iter_mut()
                        .zip(sampling::standard_normal_vec(rng, k))
                        .for_each(|(a, b)| *a = b);
                }
                CouplingFamily::Comonotone => {
                    let g = sampling::standard_normal_vec(rng, 1)[0];
                    z.iter_mut().for_each(|a| *a = g);
                }
                CouplingFamily::BoxProduct { .. } => {
                    boxed
                        .as_ref()
                        .expect("built above")
                        .sample_into(rng, &mut z);
                }
                CouplingFamily::Permutation { .. } => {
                    let u = perm.as_ref().expect("built above").sample(rng);
                    for (a, ui) in z.iter_mut().zip(u) {
                        *a = gaussian::quantile_unchecked(ui.clamp(1e-300, 1.0 - 1e-16));
                    }
                }
            }
            let combined: f64 = weights.iter().zip(&z).map(|(l, zi)| l * zi).sum();
            if combined >= w {
                hits += 1;
            }
        }
        hits
    })?;
    Ok(Estimate::proportion(hits.iter().sum(), samples as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P1: f64 = 0.3810856042280729;

    #[test]
    fn first_moment_examples() {
        assert!((first_moment_bound(1.0).unwrap() - P1).abs() < 1e-12);
        let lo = first_moment_bound(1.5).unwrap();
        let hi = first_moment_bound(0.5).unwrap();
        assert!(lo < P1 && P1 < hi);
        assert!(first_moment_bound(0.0).is_err());
    }

    #[test]
    fn plain_certificate_minimum() {
        for w in [0.5, 1.0, 1.5] {
            let th = gaussian::solve_threshold(w).unwrap();
            let at_min = plain_certificate_h(th.y_w, w).unwrap();
            assert!((at_min - th.p_w).abs() < 1e-10);
            for dy in [-0.5, 0.5] {
                assert!(plain_certificate_h(th.y_w + dy, w).unwrap() > at_min);
            }
            let mut y = -w + 0.05;
            while y <= 6.0 {
                assert!(plain_certificate_h(y, w).unwrap() >= th.p_w - 1e-10);
                y += 0.01;
            }
            let h = 1e-5;
            let dlog = (plain_certificate_h(th.y_w + h, w).unwrap().ln()
                - plain_certificate_h(th.y_w - h, w).unwrap().ln())
                / (2.0 * h);
            assert!(dlog.abs() < 1e-6);
        }
        assert!(plain_certificate_h(-1.0, 1.0).is_err());
        assert!(plain_certificate_h(-1.5, 1.0).is_err());
    }

    #[test]
    fn single_weight_certificate() {
        let c = refined_certificate(1.0, &[1.0]).unwrap();
        assert!((c.breakpoints[0] - 1.0).abs() < 1e-15);
        assert!((c.bound - 0.2616144898577462).abs() < 1e-12);
        assert!(c.bound >= gaussian::sf(1.0));
        assert!(!c.extended_range);
    }

    #[test]
    fn two_equal_weights() {
        let c = refined_certificate(1.0, &equal_weights(2)).unwrap();
        assert!((c.breakpoints[0] - 1.697369159288427).abs() < 1e-12);
        assert!((c.bound - 0.3546930386355753).abs() < 1e-12);
    }

    #[test]
    fn certificate_domain_and_flags() {
        assert!(refined_certificate(0.3, &[1.0]).is_err());
        assert!(refined_certificate(2.1, &[1.0]).is_err());
        assert!(refined_certificate(1.0, &[0.6, 0.6]).is_err());
        assert!(refined_certificate(1.0, &[]).is_err());
        assert!(refined_certificate(1.9, &[1.0]).unwrap().extended_range);
        assert!(refined_certificate(0.45, &[1.0]).unwrap().extended_range);
        let c = refined_certificate(1.0, &[0.0, 1.0]).unwrap();
        assert_eq!(c.gains[0], 0.0);
        assert!(c.breakpoints[0].is_infinite());
    }

    #[test]
    fn gain_stays_positive_past_f64_resolution() {
        for k in [16, 32] {
            let c = refined_certificate(1.0, &equal_weights(k)).unwrap();
            assert!(c.total_gain > 0.0);
            assert!(c.log_total_gain.is_finite());
            assert!(c.bound <= c.p_w);
        }
    }

    #[test]
    fn feasibility_trivial_points() {
        let c = refined_certificate(1.0, &equal_weights(3)).unwrap();
        assert!(check_feasibility(&c, &[-1.0, -2.0, -0.5]).unwrap());
        assert_eq!(c.evaluate(&[-1.0, -2.0, -0.5]), 0.0);
        assert!((c.evaluate(&[1.0, 1.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!(check_feasibility(&c, &[1.0, 1.0, 1.0]).unwrap());
        assert!(check_feasibility(&c, &[1.0]).is_err());
    }

    #[test]
    fn small_fuzz_run() {
        let c = refined_certificate(1.0, &[0.5, 0.3, 0.2]).unwrap();
        let r = fuzz_feasibility(&c, 20_000, 3).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.events > 1000);
    }

    #[test]
    fn lagrange_examples() {
        let one = equal_weights_minimum(1, 1.0, 0).unwrap();
        assert!((one.minimum - (-1.0f64).exp()).abs() < 1e-15);
        let two = equal_weights_minimum(2, 1.0, 0).unwrap();
        assert!((two.minimum - (-4.0f64).exp()).abs() < 1e-15);
        assert!(two.swept_minimum >= two.minimum);
        let skew = lagrange_objective(&[0.9, 0.1], 1.0);
        assert!((skew - 0.262).abs() < 1e-3);
        assert!(equal_weights_minimum(0, 1.0, 0).is_err());
        assert!(equal_weights_minimum(2, 0.0, 0).is_err());
    }

    #[test]
    fn conv_bound_shape() {
        assert!((conv_exceedance_bound(1, 0.0).unwrap() - 0.2616144898577462).abs() < 1e-12);
        assert!(conv_exceedance_bound(1, 0.3).is_err());
        let mut prev = 0.0;
        for delta in [0.0, 0.01, 0.05, 0.1, 0.25] {
            let b = conv_exceedance_bound(3, delta).unwrap();
            assert!(b > prev);
            prev = b;
        }
        let mut prev = 0.0;
        for k in [1, 2, 3, 5, 8] {
            let b = conv_exceedance_bound(k, 0.01).unwrap();
            assert!(b > prev);
            prev = b;
        }
    }

    #[test]
    fn rho_grid_spans_range() {
        let g = default_rho_grid(12);
        assert_eq!(g.len(), 12);
        assert!((g[0] - 0.005).abs() < 1e-15);
        assert!((g[11] - 0.25 * P1).abs() < 1e-12);
        assert!(box_lower_bound(4, 0.2, 100, 0, 1).is_err());
        assert!(box_lower_bound(4, 0.0, 100, 0, 1).is_err());
    }

    #[test]
    fn box_bound_at_one_dimension() {
        let r = box_lower_bound(1, 0.05, 200_000, 11, 1).unwrap();
        assert!((r.estimate.value - gaussian::sf(1.0)).abs() < 4.0 * r.estimate.stderr);
        assert!(r.estimate.value <= P1);
    }
}
