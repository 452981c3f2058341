//! Scalar standard-Gaussian analysis.
//!
//! Distribution functions, the threshold solver for the upper quantile whose
//! conditional mean equals a target, truncated moments, and the Laplace-type
//! integral `S(alpha, rho)` together with the Chernoff exponent built from it.
//!
//! Everything here is a pure function of its arguments.

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Above this point the Mills ratio and the tail integral switch to the
/// continued fraction.
const CF_SWITCH: f64 = 4.0;
const CF_DEPTH: usize = 160;

/// Standard Gaussian density.
#[inline]
pub fn pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard Gaussian distribution function `Phi(x)`.
#[inline]
pub fn cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Phi(x)`, accurate in the right tail.
#[inline]
pub fn sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `(pdf(x), cdf(x))`.
pub fn gaussian_eval(x: f64) -> (f64, f64) {
    (pdf(x), cdf(x))
}

/// Inverse of [`cdf`]. Acklam's rational approximation followed by two Halley
/// steps against the erfc-based distribution function.
pub fn quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("quantile needs p in (0,1), got {p}")));
    }
    if p > 0.5 {
        // 1 - p is exact here.
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

/// Same as [`quantile`] for callers that have already validated `p`.
pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0, "p = {p}");
    if p > 0.5 {
        -lower_quantile(1.0 - p)
    } else {
        lower_quantile(p)
    }
}

/// Quantile of the upper tail: the `x` with `1 - Phi(x) = q`.
pub(crate) fn upper_quantile_unchecked(q: f64) -> f64 {
    -quantile_unchecked(q)
}

fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..2 {
        let e = cdf(x) - p;
        let u = e * SQRT_2PI * (0.5 * x * x).exp();
        if !u.is_finite() {
            break;
        }
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Alias matching the operation name used throughout the crate.
pub fn gaussian_quantile(p: f64) -> Result<f64> {
    quantile(p)
}

/// Mills ratio `(1 - Phi(x)) / phi(x)`.
pub fn mills_ratio(x: f64) -> f64 {
    if x < CF_SWITCH {
        sf(x) / pdf(x)
    } else {
        1.0 / (x + 1.0 / mills_tail_cf(x))
    }
}

/// `x + 2/(x + 3/(x + ...))`, the continued fraction of the Mills ratio with
/// its first level removed.
fn mills_tail_cf(x: f64) -> f64 {
    let mut t = x;
    for k in (2..=CF_DEPTH).rev() {
        t = x + k as f64 / t;
    }
    t
}

/// `T(r) = integral over [r, inf) of (x - r) phi(x) dx = phi(r) - r (1 - Phi(r))`.
///
/// Evaluated without cancellation in the right tail, where it equals
/// `phi(r) / (g (r + 1/g))` with `g` the truncated Mills continued fraction.
pub fn tail_integral(r: f64) -> f64 {
    if r < CF_SWITCH {
        pdf(r) - r * sf(r)
    } else {
        let g = mills_tail_cf(r);
        pdf(r) / (g * (r + 1.0 / g))
    }
}

/// Natural log of [`tail_integral`]; stays finite where the integral underflows.
pub fn ln_tail_integral(r: f64) -> f64 {
    if r < CF_SWITCH {
        tail_integral(r).ln()
    } else {
        let g = mills_tail_cf(r);
        -0.5 * r * r - 0.5 * (2.0 * std::f64::consts::PI).ln() - (g * (r + 1.0 / g)).ln()
    }
}

/// `R(y) = phi(y) / Phi(y)`, the conditional mean of `Z` given `Z > -y`.
fn inverse_mills_left(y: f64) -> f64 {
    if y > -CF_SWITCH {
        pdf(y) / cdf(y)
    } else {
        1.0 / mills_ratio(-y)
    }
}

/// `E[Z | Z > a]` for a standard Gaussian `Z`.
pub fn conditional_mean_above(a: f64) -> f64 {
    1.0 / mills_ratio(a)
}

/// Mean and variance of a standard Gaussian conditioned to exceed `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedGaussianMoments {
    pub a: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn truncated_moments(a: f64) -> TruncatedGaussianMoments {
    let mean = conditional_mean_above(a);
    TruncatedGaussianMoments {
        a,
        mean,
        variance: 1.0 + a * mean - mean * mean,
    }
}

/// The solved threshold for a target conditional mean `w`:
/// `phi(y_w) / Phi(y_w) = w`, `p_w = Phi(y_w)`, `a_w = 1 / (y_w + w)`.
///
/// `p_w` is the mass of the upper quantile block whose conditional mean is
/// `w`. For `w` beyond roughly 37 it underflows to zero in double precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianThreshold {
    pub w: f64,
    pub y_w: f64,
    pub p_w: f64,
    pub a_w: f64,
}

const BISECTION_CAP: usize = 400;

/// Solves `phi(y)/Phi(y) = w` by bisection.
///
/// The initial bracket is `[-10, 10]`; it is widened geometrically when the
/// root lies outside (only for `w` below about `1e-22` or above about 10).
pub fn solve_threshold(w: f64) -> Result<GaussianThreshold> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::domain(format!(
            "threshold solver needs w > 0, got {w}"
        )));
    }
    let mut lo = -10.0_f64;
    let mut hi = 10.0_f64;
    let mut widen = 0;
    while inverse_mills_left(lo) < w {
        lo *= 2.0;
        widen += 1;
        if widen > 60 {
            return Err(Error::NoConvergence(format!(
                "cannot bracket root for w = {w}"
            )));
        }
    }
    while inverse_mills_left(hi) > w {
        hi *= 2.0;
        widen += 1;
        if widen > 60 {
            return Err(Error::NoConvergence(format!(
                "cannot bracket root for w = {w}"
            )));
        }
    }
    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // R is decreasing, so R(mid) > w means the root lies to the right.
        if inverse_mills_left(mid) > w {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations > BISECTION_CAP {
            return Err(Error::NoConvergence(format!(
                "bisection exceeded {BISECTION_CAP} steps for w = {w}"
            )));
        }
    }
    let r_lo = (inverse_mills_left(lo) - w).abs();
    let r_hi = (inverse_mills_left(hi) - w).abs();
    let y_w = if r_lo <= r_hi { lo } else { hi };
    Ok(GaussianThreshold {
        w,
        y_w,
        p_w: cdf(y_w),
        a_w: 1.0 / (y_w + w),
    })
}

impl GaussianThreshold {
    /// `|phi(y_w)/Phi(y_w) - w|`.
    pub fn residual(&self) -> f64 {
        (inverse_mills_left(self.y_w) - self.w).abs()
    }
}

/// `Q(p) = phi(Phi^{-1}(p)) / p`. Decreasing, with `Q(p_w) = w`.
pub fn quantile_mean_ratio(p: f64) -> Result<f64> {
    if p == 1.0 {
        return Ok(0.0);
    }
    Ok(pdf(quantile(p)?) / p)
}

/// Second-order partial derivatives of `S(alpha, rho)` at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplacePartials {
    pub s: f64,
    pub s_rho: f64,
    pub s_alpha: f64,
    pub s_rho_rho: f64,
    pub s_alpha_rho: f64,
    pub s_alpha_alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEvaluation {
    pub x: f64,
    pub rho: f64,
    pub value: f64,
}

/// The truncated-Gaussian model at `w = 1`: i.i.d. Gaussians conditioned to
/// exceed `Phi^{-1}(1 - p_1 + rho)`, with drift `kappa` and variance `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub threshold: GaussianThreshold,
    /// `d/d rho E_rho[Z]` at zero, `(1 + y_1) / p_1`.
    pub kappa: f64,
    /// Variance of `Z` given `Z > -y_1`; equals `-y_1`.
    pub variance: f64,
    /// Minimiser of the quadratic part of the Chernoff exponent, `kappa / (2V)`.
    pub x0: f64,
}

impl Default for TailModel {
    fn default() -> Self {
        Self::new()
    }
}

impl TailModel {
    pub fn new() -> Self {
        let threshold = solve_threshold(1.0).expect("w = 1 is always bracketed");
        let p1 = threshold.p_w;
        let y1 = threshold.y_w;
        let kappa = (1.0 + y1) / p1;
        let variance = truncated_moments(-y1).variance;
        TailModel {
            threshold,
            kappa,
            variance,
            x0: kappa / (2.0 * variance),
        }
    }

    pub fn p1(&self) -> f64 {
        self.threshold.p_w
    }

    pub fn y1(&self) -> f64 {
        self.threshold.y_w
    }

    /// `(kappa, V)` with `V` from the truncated-moment identity.
    pub fn kappa_and_v(&self) -> (f64, f64) {
        (self.kappa, self.variance)
    }

    /// `V = S_alpha_alpha / p_1 - 1` via the second alpha-derivative of the
    /// closed form of `S`.
    pub fn variance_from_laplace(&self) -> f64 {
        self.partials_at_zero().s_alpha_alpha / self.p1() - 1.0
    }

    /// Truncation point `Phi^{-1}(1 - p_1 + rho)`.
    pub fn truncation_point(&self, rho: f64) -> Result<f64> {
        let level = 1.0 - self.p1() + rho;
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::domain(format!(
                "1 - p_1 + rho = {level} leaves (0,1) for rho = {rho}"
            )));
        }
        quantile(level)
    }

    /// `S(alpha, rho) = integral over [Phi^{-1}(1-p_1+rho), inf) of e^{-alpha u} phi(u) du`,
    /// in closed form `e^{alpha^2/2} (1 - Phi(q + alpha))`.
    pub fn laplace_s(&self, alpha: f64, rho: f64) -> Result<f64> {
        let q = self.truncation_point(rho)?;
        Ok((0.5 * alpha * alpha).exp() * sf(q + alpha))
    }

    pub fn partials_at_zero(&self) -> LaplacePartials {
        let p1 = self.p1();
        let y1 = self.y1();
        // Second alpha-derivative of e^{a^2/2} sf(q + a) at a = 0 is
        // sf(q) + q phi(q); at q = -y_1 this is p_1 (1 - y_1).
        let q = -y1;
        LaplacePartials {
            s: p1,
            s_rho: -1.0,
            s_alpha: -p1,
            s_rho_rho: 0.0,
            s_alpha_rho: -y1,
            s_alpha_alpha: sf(q) + q * pdf(q),
        }
    }

    fn check_rho(&self, rho: f64) -> Result<()> {
        let cap = 0.5 * self.p1();
        if !(rho >= 0.0 && rho < cap) {
            return Err(Error::domain(format!(
                "rho must lie in [0, p_1/2) = [0, {cap}), got {rho}"
            )));
        }
        Ok(())
    }

    /// `I_x(rho) = rho x (1 + kappa rho / 2) + log(S(rho x, rho) / (p_1 - rho))`.
    ///
    /// `rho = 0` is accepted as the base point, where the exponent vanishes.
    pub fn rate_function(&self, x: f64, rho: f64) -> Result<RateEvaluation> {
        self.check_rho(rho)?;
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::domain(format!(
                "tilt multiplier must be >= 0, got {x}"
            )));
        }
        let alpha = rho * x;
        let q = self.truncation_point(rho)?;
        let log_s = 0.5 * alpha * alpha + sf(q + alpha).ln();
        let value = alpha * (1.0 + 0.5 * self.kappa * rho) + log_s - (self.p1() - rho).ln();
        Ok(RateEvaluation { x, rho, value })
    }

    /// `min(1, exp(d I_{x0}(rho)))`: a bound on the probability that the mean
    /// of `d` truncated Gaussians falls to `1 + kappa rho / 2` or below.
    pub fn chernoff_bound(&self, rho: f64, d: usize) -> Result<f64> {
        if rho == 0.0 {
            return Err(Error::domain("Chernoff bound needs rho > 0"));
        }
        if d == 0 {
            return Err(Error::domain("Chernoff bound needs d >= 1"));
        }
        let rate = self.rate_function(self.x0, rho)?;
        Ok((d as f64 * rate.value).exp().clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_at_zero() {
        let (p, c) = gaussian_eval(0.0);
        assert!((p - 0.398_942_280_401_432_7).abs() < 1e-16);
        assert_eq!(c, 0.5);
        assert_eq!(quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn quantile_rejects_boundary() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(quantile(p), Err(Error::Domain(_))), "p = {p}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let mut p = 1e-300;
        while p < 0.5 {
            let x = quantile(p).unwrap();
            assert!(((cdf(x) - p) / p).abs() < 1e-12, "p = {p}");
            p *= 3.7;
        }
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            assert!((cdf(quantile(p).unwrap()) - p).abs() < 1e-15, "p = {p}");
        }
    }

    #[test]
    fn mills_ratio_is_continuous_at_switch() {
        let below = mills_ratio(CF_SWITCH - 1e-12);
        let above = mills_ratio(CF_SWITCH);
        assert!((below - above).abs() / above < 1e-12);
        for x in [4.0, 5.0, 6.0, 7.5, 8.0] {
            let direct = sf(x) / pdf(x);
            let cf = 1.0 / (x + 1.0 / mills_tail_cf(x));
            assert!((direct - cf).abs() / direct < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn tail_integral_matches_mpmath_values() {
        // Reference values from 40-digit mpmath quadrature.
        let cases = [
            (1.0, 0.083_315_470_587_686_3),
            (5.0, 5.346_165_533_832_815e-8),
            (10.0, 7.474_560_254_589_328e-25),
        ];
        for (r, want) in cases {
            let got = tail_integral(r);
            assert!(
                ((got - want) / want).abs() < 1e-10,
                "r = {r}: {got} vs {want}"
            );
            assert!((ln_tail_integral(r) - want.ln()).abs() < 1e-10);
        }
        assert!(ln_tail_integral(60.0).is_finite());
    }

    #[test]
    fn threshold_at_one() {
        let t = solve_threshold(1.0).unwrap();
        assert!((t.y_w - -0.302_630_840_711_572_7).abs() < 1e-13);
        assert!((t.p_w - 0.381_085_604_228_072_9).abs() < 1e-13);
        assert!(t.residual() < 1e-12);
        assert!((pdf(t.y_w) - cdf(t.y_w)).abs() < 1e-12);
        assert!((conditional_mean_above(-t.y_w) - 1.0).abs() < 1e-12);
        assert!(t.a_w > 0.0);
    }

    #[test]
    fn threshold_brackets_and_large_w() {
        let p05 = solve_threshold(0.5).unwrap().p_w;
        let p1 = solve_threshold(1.0).unwrap().p_w;
        let p15 = solve_threshold(1.5).unwrap().p_w;
        assert!(p15 < p1 && p1 < p05);
        assert!((p05 - 0.697_740_415_233_015_6).abs() < 1e-12);
        assert!((p15 - 0.166_386_489_089_191_2).abs() < 1e-12);
        let p10 = solve_threshold(10.0).unwrap();
        assert!(p10.p_w < 0.01);
        assert!((p10.y_w - -9.900_962_476_983_372).abs() < 1e-10);
        assert!(solve_threshold(1e3).unwrap().residual() < 1e-10);
        assert!(solve_threshold(1e-3).unwrap().residual() < 1e-12);
    }

    #[test]
    fn threshold_rejects_nonpositive() {
        assert!(solve_threshold(0.0).is_err());
        assert!(solve_threshold(-1.0).is_err());
    }

    #[test]
    fn q_function_recovers_w() {
        for w in [0.5, 1.0, 1.5, 3.0] {
            let t = solve_threshold(w).unwrap();
            assert!(
                (quantile_mean_ratio(t.p_w).unwrap() - w).abs() < 1e-9,
                "w = {w}"
            );
        }
        assert_eq!(quantile_mean_ratio(1.0).unwrap(), 0.0);
    }

    #[test]
    fn truncated_moment_examples() {
        assert!(conditional_mean_above(-40.0).abs() < 1e-300);
        let model = TailModel::new();
        let m = truncated_moments(-model.y1());
        assert!((m.mean - 1.0).abs() < 1e-12);
        assert!((m.variance + model.y1()).abs() < 1e-9);
        for a in [-3.0, -1.0, 0.0, 0.5, 2.0, 4.0] {
            let m = truncated_moments(a);
            assert!(m.mean > a && m.variance > 0.0);
            if a >= 0.0 {
                assert!(m.mean > 0.0);
            }
        }
    }

    #[test]
    fn kappa_and_variance() {
        let model = TailModel::new();
        let (kappa, v) = model.kappa_and_v();
        assert!((kappa - 1.829_954_087_877_495).abs() < 1e-12);
        assert!((v - 0.302_630_840_711_572_7).abs() < 1e-12);
        assert!((model.variance_from_laplace() - v).abs() < 1e-9);
        assert!((model.x0 - 3.023_409_781_327_546).abs() < 1e-10);
    }

    #[test]
    fn laplace_s_base_point_and_domain() {
        let model = TailModel::new();
        assert!((model.laplace_s(0.0, 0.0).unwrap() - model.p1()).abs() < 1e-15);
        assert!(model.laplace_s(0.0, 0.7).is_err());
        assert!(model.laplace_s(0.0, -0.7).is_err());
    }

    #[test]
    fn rate_function_domain() {
        let model = TailModel::new();
        assert!(model.rate_function(1.0, 0.19).is_ok());
        assert!(model.rate_function(1.0, 0.2).is_err());
        assert!(model.rate_function(1.0, 0.5 * model.p1()).is_err());
        assert!(model.rate_function(1.0, -0.01).is_err());
        assert!(model.rate_function(-1.0, 0.1).is_err());
        assert!(model.chernoff_bound(0.0, 10).is_err());
    }
}
