//! Reference implementations used only by the tests. None of them call into
//! the library's Gaussian routines.

#![allow(dead_code)]

use std::f64::consts::PI;

pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Marsaglia's Taylor series `Phi(x) = 1/2 + phi(x) sum x^{2k+1} / (2k+1)!!`.
/// Accurate to a few ulps for `|x| <= 8`.
pub fn big_phi(x: f64) -> f64 {
    let (mut term, mut sum, mut k) = (x, x, 0.0);
    loop {
        k += 1.0;
        term *= x * x / (2.0 * k + 1.0);
        if sum + term == sum {
            break;
        }
        sum += term;
    }
    0.5 + phi(x) * sum
}

/// Upper tail by the same series; only for moderate `x`.
pub fn big_phi_upper(x: f64) -> f64 {
    big_phi(-x)
}

/// Root of a decreasing function on `[lo, hi]` by plain bisection.
pub fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `y` with `phi(y)/Phi(y) = w`.
pub fn threshold_oracle(w: f64) -> f64 {
    bisect_decreasing(|y| phi(y) / big_phi(y) - w, -8.0, 8.0)
}

/// Inverse of [`big_phi`] by bisection.
pub fn quantile_oracle(p: f64) -> f64 {
    bisect_decreasing(|x| p - big_phi(x), -8.0, 8.0)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite Gauss-Legendre rule over `[a, b]` with `panels` panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            rule.iter()
                .map(|(x, w)| w * f(lo + 0.5 * h * (x + 1.0)))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

/// `int |F(x) - Phi(x)| dx` for the empirical CDF of `atoms`, by quadrature
/// on every interval between consecutive atoms plus the two tails. Intervals
/// are split where `Phi` crosses the empirical level so the integrand is smooth.
pub fn w1_to_gaussian_oracle(atoms: &[f64]) -> f64 {
    let mut xs = atoms.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut knots = vec![xs[0].min(-12.0) - 1.0];
    knots.extend(&xs);
    knots.push(xs[xs.len() - 1].max(12.0) + 1.0);
    let cdf = |x: f64| xs.iter().filter(|&&a| a <= x).count() as f64 / n;
    knots
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let level = cdf(0.5 * (w[0] + w[1]));
            let gap = |x: f64| (level - big_phi(x)).abs();
            if level > 0.0 && level < 1.0 {
                let cross = quantile_oracle(level);
                if cross > w[0] && cross < w[1] {
                    return integrate(gap, w[0], cross, 8) + integrate(gap, cross, w[1], 8);
                }
            }
            integrate(gap, w[0], w[1], 8)
        })
        .sum()
}

/// Minimal average `|a_i - b_{pi(i)}|` over all bijections.
pub fn matching_cost(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut idx, 0, &mut |p| {
        let c: f64 = p
            .iter()
            .enumerate()
            .map(|(i, &j)| (a[i] - b[j]).abs())
            .sum();
        best = best.min(c);
    });
    best / n as f64
}

/// Calls `f` on every permutation of `v` (Heap-free recursive swap order).
pub fn permute(v: &mut Vec<usize>, start: usize, f: &mut impl FnMut(&[usize])) {
    if start == v.len() {
        f(v);
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permute(v, start + 1, f);
        v.swap(start, i);
    }
}
