//! Point-mass null prior `δ_{μ0}`, `μ0 ≤ 0`: the null is `N(μ0, 1)` and is fitted
//! by Newton–Raphson on the truncated-sample likelihood.

use crate::dist::{mills_ratio, std_normal_log_cdf, std_normal_log_pdf};
use crate::error::Result;
use crate::sample::StatSample;

use super::truncation::truncated_set;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GaussianOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

/// Fitted Gaussian null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianNull {
    /// Constrained estimate `min(μ̂_NR, 0)`.
    pub mu0: f64,
    /// Newton–Raphson stationary point before the constraint.
    pub mu0_unconstrained: f64,
    /// Truncated-sample log-likelihood at `mu0`.
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// `ℓ(μ0) = Σ ln φ(Z_i - μ0) - |S0| ln Φ(ξ - μ0)` over the truncated values.
pub fn gaussian_null_loglik(truncated: &[f64], cut: f64, mu0: f64) -> f64 {
    let n = truncated.len() as f64;
    truncated
        .iter()
        .map(|&z| std_normal_log_pdf(z - mu0))
        .sum::<f64>()
        - n * std_normal_log_cdf(cut - mu0)
}

pub fn fit_gaussian(sample: &StatSample, cut: f64) -> Result<GaussianNull> {
    fit_gaussian_with(sample, cut, GaussianOptions::default())
}

pub fn fit_gaussian_with(
    sample: &StatSample,
    cut: f64,
    options: GaussianOptions,
) -> Result<GaussianNull> {
    let truncated = truncated_set(sample, cut, 2)?;
    let n = truncated.len() as f64;
    let mean = truncated.iter().sum::<f64>() / n;
    let min = truncated.iter().copied().fold(f64::INFINITY, f64::min);

    // ℓ'(μ)/n and ℓ''(μ)/n. With x = ξ - μ, d/dμ R(x) = R(x)(x + R(x)), so
    // ℓ'' = -n[1 - R(x)(x + R(x))], minus n times a truncated-normal variance.
    let score = |mu: f64| (mean - mu) + mills_ratio(cut - mu);
    let curvature = |mu: f64| {
        let x = cut - mu;
        let r = mills_ratio(x);
        -(1.0 - r * (x + r))
    };

    // ℓ' is strictly decreasing; keep a bracket [lo, hi] with ℓ'(lo) > 0 > ℓ'(hi).
    let mut lo = min - 10.0;
    let mut hi = cut + 10.0;
    let mut widen = 0;
    while score(hi) > 0.0 && widen < 64 {
        hi = cut + 2.0 * (hi - cut);
        widen += 1;
    }

    let mut mu = mean.clamp(lo, hi);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iter {
        iterations += 1;
        let g = score(mu);
        if g > 0.0 {
            lo = mu;
        } else if g < 0.0 {
            hi = mu;
        } else {
            converged = true;
            break;
        }
        let mut next = mu - g / curvature(mu);
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let step = (next - mu).abs();
        mu = next;
        if step < options.tol {
            converged = true;
            break;
        }
    }

    let mu0 = mu.min(0.0);
    Ok(GaussianNull {
        mu0,
        mu0_unconstrained: mu,
        loglik: gaussian_null_loglik(&truncated, cut, mu0),
        iterations,
        converged,
    })
}
