//! Finite-grid null prior `Σ p_k δ_{μ_k}` with all `μ_k ≤ 0`.
//!
//! On the truncated sample the likelihood only depends on
//! `η_k ∝ p_k Φ(ξ - μ_k)`, in which it is a concave function over the simplex:
//! `ℓ(η) = Σ_i ln Σ_k η_k φ(Z_i - μ_k) / Φ(ξ - μ_k)`.
//! The maximizer is found by a sequential quadratic programming method with an
//! active-set subproblem solver (or by EM on request), then mapped back to `p`.

use alloc::vec;
use alloc::vec::Vec;

use crate::dist::{std_normal_log_cdf, std_normal_log_pdf};
use crate::error::{domain, Error, Result};
use crate::sample::StatSample;

use super::truncation::truncated_set;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MixtureSolver {
    /// Sequential quadratic programming with backtracking line search.
    #[default]
    Sqp,
    /// Multiplicative EM updates.
    Em,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureOptions {
    /// Number of equally spaced support points when `grid` is not given.
    pub k: usize,
    /// Explicit support points; sorted ascending, all `≤ 0`.
    pub grid: Option<Vec<f64>>,
    pub solver: MixtureSolver,
    /// Stop once the certified optimality gap `|S0| · ln max_k D_k` drops below this.
    pub gap_tol: f64,
    /// SQP only: once the objective stalls, the fit counts as converged when
    /// `max_k D_k - 1` is at most this.
    pub dual_tol: f64,
    /// EM only: stop once the objective improves by less than this per iteration.
    pub objective_tol: f64,
    pub max_iter: usize,
}

impl Default for MixtureOptions {
    fn default() -> Self {
        Self {
            k: 50,
            grid: None,
            solver: MixtureSolver::Sqp,
            gap_tol: 1e-8,
            dual_tol: 1e-8,
            objective_tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureNull {
    /// Support points `μ_1 ≤ … ≤ μ_K ≤ 0`.
    pub grid: Vec<f64>,
    /// Prior weights `p`.
    pub weights_p: Vec<f64>,
    /// Truncation-adjusted weights `η`.
    pub weights_eta: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Upper bound on `max ℓ - ℓ(η̂)`.
    pub gap: f64,
}

/// `K` equally spaced points from `min(lowest, …)` to `0`.
///
/// When every statistic is nonnegative the lower end falls back to `-1` so
/// the grid still has `K` distinct atoms.
pub fn default_grid(lowest: f64, k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(domain("k", k as f64, "at least 2"));
    }
    if !lowest.is_finite() {
        return Err(domain("lowest", lowest, "finite"));
    }
    let lo = if lowest < 0.0 { lowest } else { -1.0 };
    let step = -lo / (k - 1) as f64;
    let mut grid: Vec<f64> = (0..k).map(|j| lo + step * j as f64).collect();
    grid[0] = lo;
    grid[k - 1] = 0.0;
    Ok(grid)
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid("needs at least two support points"));
    }
    if grid.iter().any(|m| !m.is_finite()) {
        return Err(Error::InvalidGrid("support points must be finite"));
    }
    if grid.iter().any(|&m| m > 0.0) {
        return Err(Error::InvalidGrid("support points must be non-positive"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidGrid(
            "support points must be sorted ascending",
        ));
    }
    Ok(())
}

fn normalize(weights: &mut [f64]) {
    let total: f64 = weights.iter().sum();
    for w in weights {
        *w /= total;
    }
}

/// `η_k = p_k Φ(ξ - μ_k) / Σ_j p_j Φ(ξ - μ_j)`.
pub fn p_to_eta(p: &[f64], grid: &[f64], cut: f64) -> Vec<f64> {
    // Work relative to the largest log-mass to avoid underflow.
    let logs: Vec<f64> = p
        .iter()
        .zip(grid)
        .map(|(&pk, &mu)| libm::log(pk) + std_normal_log_cdf(cut - mu))
        .collect();
    rescale_exp(&logs)
}

/// Inverse of [`p_to_eta`]: `p_k ∝ η_k / Φ(ξ - μ_k)`.
pub fn eta_to_p(eta: &[f64], grid: &[f64], cut: f64) -> Vec<f64> {
    let logs: Vec<f64> = eta
        .iter()
        .zip(grid)
        .map(|(&ek, &mu)| libm::log(ek) - std_normal_log_cdf(cut - mu))
        .collect();
    rescale_exp(&logs)
}

fn rescale_exp(logs: &[f64]) -> Vec<f64> {
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|&l| libm::exp(l - top)).collect();
    normalize(&mut out);
    out
}

/// Truncated component densities `φ(Z_i - μ_k)/Φ(ξ - μ_k)`, each row scaled by
/// its maximum; the scales are kept on the log axis.
struct ComponentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    log_row_scale: Vec<f64>,
}

impl ComponentMatrix {
    fn new(truncated: &[f64], grid: &[f64], cut: f64) -> Self {
        let cols = grid.len();
        let log_norm: Vec<f64> = grid
            .iter()
            .map(|&mu| std_normal_log_cdf(cut - mu))
            .collect();
        let mut data = Vec::with_capacity(truncated.len() * cols);
        let mut log_row_scale = Vec::with_capacity(truncated.len());
        let mut row = vec![0.0; cols];
        for &z in truncated {
            for (k, (&mu, &ln)) in grid.iter().zip(&log_norm).enumerate() {
                row[k] = std_normal_log_pdf(z - mu) - ln;
            }
            let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            data.extend(row.iter().map(|&l| libm::exp(l - top)));
            log_row_scale.push(top);
        }
        Self {
            rows: truncated.len(),
            cols,
            data,
            log_row_scale,
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn mix(&self, weights: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(weights).map(|(a, b)| a * b).sum();
        }
    }

    /// Log-likelihood given mixed row values `Lη`.
    fn loglik_from_mixed(&self, mixed: &[f64]) -> f64 {
        mixed
            .iter()
            .zip(&self.log_row_scale)
            .map(|(&m, &s)| libm::log(m) + s)
            .sum()
    }

    /// `D_k = (1/n) Σ_i L_ik / (Lη)_i`, the directional derivative ratios.
    fn directional(&self, mixed: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|d| *d = 0.0);
        for (i, &m) in mixed.iter().enumerate() {
            let inv = 1.0 / m;
            for (d, &l) in out.iter_mut().zip(self.row(i)) {
                *d += l * inv;
            }
        }
        let n = self.rows as f64;
        out.iter_mut().for_each(|d| *d /= n);
    }
}

/// Truncated-mixture log-likelihood in the `η` parameterization.
pub fn mixture_null_loglik(truncated: &[f64], cut: f64, grid: &[f64], eta: &[f64]) -> f64 {
    let matrix = ComponentMatrix::new(truncated, grid, cut);
    let mut mixed = vec![0.0; matrix.rows];
    matrix.mix(eta, &mut mixed);
    matrix.loglik_from_mixed(&mixed)
}

pub fn fit_mixture(sample: &StatSample, cut: f64) -> Result<MixtureNull> {
    fit_mixture_with(sample, cut, &MixtureOptions::default())
}

pub fn fit_mixture_with(
    sample: &StatSample,
    cut: f64,
    options: &MixtureOptions,
) -> Result<MixtureNull> {
    let grid = match &options.grid {
        Some(grid) => {
            validate_grid(grid)?;
            grid.clone()
        }
        None => default_grid(sample.min().ok_or(Error::EmptySample)?, options.k)?,
    };
    let truncated = truncated_set(sample, cut, 2)?;
    let matrix = ComponentMatrix::new(&truncated, &grid, cut);
    let outcome = match options.solver {
        MixtureSolver::Sqp => solve_sqp(&matrix, options),
        MixtureSolver::Em => solve_em(&matrix, options),
    };
    let weights_p = eta_to_p(&outcome.eta, &grid, cut);
    Ok(MixtureNull {
        grid,
        weights_p,
        weights_eta: outcome.eta,
        loglik: outcome.loglik,
        iterations: outcome.iterations,
        converged: outcome.converged,
        gap: outcome.gap,
    })
}

struct SolverOutcome {
    eta: Vec<f64>,
    loglik: f64,
    gap: f64,
    iterations: usize,
    converged: bool,
}

/// Certified gap `n · ln max_k D_k(η)` for a point on the simplex.
fn optimality_gap(matrix: &ComponentMatrix, directional: &[f64]) -> f64 {
    let top = directional
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    (matrix.rows as f64 * libm::log(top)).max(0.0)
}

fn solve_em(matrix: &ComponentMatrix, options: &MixtureOptions) -> SolverOutcome {
    let k = matrix.cols;
    let mut eta = vec![1.0 / k as f64; k];
    let mut mixed = vec![0.0; matrix.rows];
    let mut directional = vec![0.0; k];
    matrix.mix(&eta, &mut mixed);
    let mut loglik = matrix.loglik_from_mixed(&mixed);
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iter {
        matrix.directional(&mixed, &mut directional);
        gap = optimality_gap(matrix, &directional);
        if gap < options.gap_tol {
            converged = true;
            break;
        }
        iterations += 1;
        for (e, d) in eta.iter_mut().zip(&directional) {
            *e *= d;
        }
        normalize(&mut eta);
        matrix.mix(&eta, &mut mixed);
        let next = matrix.loglik_from_mixed(&mixed);
        let gain = next - loglik;
        loglik = next;
        if gain.abs() < options.objective_tol {
            matrix.directional(&mixed, &mut directional);
            gap = optimality_gap(matrix, &directional);
            converged = true;
            break;
        }
    }
    SolverOutcome {
        eta,
        loglik,
        gap,
        iterations,
        converged,
    }
}

/// Relaxed objective `-(1/n) Σ ln (Lx)_i + Σ x_k` over `x ≥ 0`; its minimizer
/// lies on the simplex and coincides with the maximizer of `ℓ(η)`.
fn relaxed_objective(matrix: &ComponentMatrix, x: &[f64], mixed: &mut [f64]) -> f64 {
    matrix.mix(x, mixed);
    if mixed.iter().any(|&m| !(m > 0.0)) {
        return f64::INFINITY;
    }
    let n = matrix.rows as f64;
    -mixed.iter().map(|&m| libm::log(m)).sum::<f64>() / n + x.iter().sum::<f64>()
}

fn solve_sqp(matrix: &ComponentMatrix, options: &MixtureOptions) -> SolverOutcome {
    const RIDGE: f64 = 1e-10;
    const ARMIJO: f64 = 0.01;
    let k = matrix.cols;
    let n = matrix.rows as f64;
    let mut x = vec![1.0 / k as f64; k];
    let mut mixed = vec![0.0; matrix.rows];
    let mut trial_mixed = vec![0.0; matrix.rows];
    let mut directional = vec![0.0; k];
    let mut hessian = vec![0.0; k * k];
    let mut eta = vec![0.0; k];
    let mut objective = relaxed_objective(matrix, &x, &mut mixed);
    let mut gap;
    let mut iterations = 0;
    let mut converged = false;
    let mut stalled = false;
    let mut fallback = false;

    loop {
        // Certificate on the normalized point.
        let total: f64 = x.iter().sum();
        eta.iter_mut().zip(&x).for_each(|(e, &v)| *e = v / total);
        let scaled: Vec<f64> = mixed.iter().map(|&m| m / total).collect();
        matrix.directional(&scaled, &mut directional);
        gap = optimality_gap(matrix, &directional);
        // The gap bound can stay well above the true suboptimality when weights
        // that belong at tiny positive values sit at zero; the dual residual is
        // the usual test once no further progress is possible.
        let dual = directional
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
            - 1.0;
        if gap < options.gap_tol || (stalled && dual <= options.dual_tol) {
            converged = true;
            break;
        }
        if (stalled && fallback) || iterations >= options.max_iter {
            break;
        }
        // A stalled Newton step with a sizeable dual residual usually means the
        // subproblem failed to free a component; try a projected gradient step.
        fallback = stalled;
        iterations += 1;

        // Gradient and Hessian of the relaxed objective at x.
        matrix.directional(&mixed, &mut directional);
        let gradient: Vec<f64> = directional.iter().map(|d| 1.0 - d).collect();
        hessian.iter_mut().for_each(|h| *h = 0.0);
        for (i, &m) in mixed.iter().enumerate() {
            let w = 1.0 / (m * m);
            let row = matrix.row(i);
            for a in 0..k {
                let ra = row[a] * w;
                if ra == 0.0 {
                    continue;
                }
                let dst = &mut hessian[a * k..a * k + a + 1];
                for (h, &rb) in dst.iter_mut().zip(&row[..=a]) {
                    *h += ra * rb;
                }
            }
        }
        for a in 0..k {
            for b in 0..=a {
                let v = hessian[a * k + b] / n;
                hessian[a * k + b] = v;
                hessian[b * k + a] = v;
            }
            hessian[a * k + a] += RIDGE;
        }

        // Quadratic model in the new point y: ½ yᵀHy + (g - Hx)ᵀy, y ≥ 0.
        let linear: Vec<f64> = (0..k)
            .map(|a| gradient[a] - (0..k).map(|b| hessian[a * k + b] * x[b]).sum::<f64>())
            .collect();
        let mut direction: Vec<f64> = if fallback {
            projected_gradient(&gradient, &x)
        } else {
            let target = nonnegative_qp(&hessian, &linear, &x, k);
            target.iter().zip(&x).map(|(t, v)| t - v).collect()
        };
        let mut slope: f64 = gradient.iter().zip(&direction).map(|(g, d)| g * d).sum();
        if !(slope < 0.0) && !fallback {
            fallback = true;
            direction = projected_gradient(&gradient, &x);
            slope = gradient.iter().zip(&direction).map(|(g, d)| g * d).sum();
        }
        if !(slope < 0.0) {
            // No descent direction left within numerical precision.
            converged = gap < options.gap_tol || dual <= options.dual_tol;
            break;
        }

        let mut step = 1.0;
        let mut accepted = false;
        let mut trial = vec![0.0; k];
        while step > 1e-12 {
            for a in 0..k {
                trial[a] = (x[a] + step * direction[a]).max(0.0);
            }
            let value = relaxed_objective(matrix, &trial, &mut trial_mixed);
            if value <= objective + ARMIJO * step * slope {
                stalled = objective - value <= 4.0 * f64::EPSILON * libm::fabs(value).max(1.0);
                x.copy_from_slice(&trial);
                mixed.copy_from_slice(&trial_mixed);
                objective = value;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if fallback {
                break;
            }
            fallback = true;
            stalled = true;
        }
    }

    let total: f64 = x.iter().sum();
    eta.iter_mut().zip(&x).for_each(|(e, &v)| *e = v / total);
    matrix.mix(&eta, &mut mixed);
    SolverOutcome {
        loglik: matrix.loglik_from_mixed(&mixed),
        eta,
        gap,
        iterations,
        converged,
    }
}

/// Steepest descent direction restricted to the feasible cone at `x`, scaled
/// so that its largest entry is comparable to the weights.
fn projected_gradient(gradient: &[f64], x: &[f64]) -> Vec<f64> {
    let mut d: Vec<f64> = gradient
        .iter()
        .zip(x)
        .map(|(&g, &v)| if v > 0.0 { -g } else { (-g).max(0.0) })
        .collect();
    let size = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let weight = x.iter().fold(0.0_f64, |m, v| m.max(*v));
    if size > 0.0 {
        let factor = weight.max(1e-3) / size;
        d.iter_mut().for_each(|v| *v *= factor);
    }
    d
}

/// Primal active-set method for `min ½ yᵀHy + bᵀy` subject to `y ≥ 0`, with
/// `H` symmetric positive definite (row-major, `k × k`), started from `start ≥ 0`.
fn nonnegative_qp(hessian: &[f64], linear: &[f64], start: &[f64], k: usize) -> Vec<f64> {
    let mut y = start.to_vec();
    let mut free: Vec<bool> = y.iter().map(|&v| v > 0.0).collect();
    if !free.iter().any(|&f| f) {
        let best = (0..k)
            .min_by(|&a, &b| linear[a].total_cmp(&linear[b]))
            .unwrap_or(0);
        free[best] = true;
    }
    let scale = linear.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let max_iter = 10 * k + 100;

    for _ in 0..max_iter {
        let gradient: Vec<f64> = (0..k)
            .map(|a| linear[a] + (0..k).map(|b| hessian[a * k + b] * y[b]).sum::<f64>())
            .collect();
        let index: Vec<usize> = (0..k).filter(|&a| free[a]).collect();
        let rhs: Vec<f64> = index.iter().map(|&a| -gradient[a]).collect();
        let sub: Vec<f64> = index
            .iter()
            .flat_map(|&a| index.iter().map(move |&b| hessian[a * k + b]))
            .collect();
        let Some(step) = regularized_solve(&sub, &rhs, index.len()) else {
            break;
        };
        let step_norm = step.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let y_norm = y.iter().fold(1.0_f64, |m, v| m.max(v.abs()));

        if step_norm <= 1e-14 * y_norm {
            // Stationary on this face: release the most negative multiplier.
            let release = (0..k)
                .filter(|&a| !free[a])
                .min_by(|&a, &b| gradient[a].total_cmp(&gradient[b]));
            match release {
                Some(a) if gradient[a] < -1e-12 * scale => free[a] = true,
                _ => break,
            }
            continue;
        }

        let mut alpha = 1.0;
        let mut blocking = None;
        for (&a, &s) in index.iter().zip(&step) {
            if s < 0.0 {
                let ratio = -y[a] / s;
                if ratio < alpha {
                    alpha = ratio;
                    blocking = Some(a);
                }
            }
        }
        for (&a, &s) in index.iter().zip(&step) {
            y[a] = (y[a] + alpha * s).max(0.0);
        }
        if let Some(a) = blocking {
            y[a] = 0.0;
            free[a] = false;
        }
    }
    y
}

/// Solves `A x = b` for symmetric positive definite `A` (row-major `n × n`).
/// Cholesky solve, adding a growing diagonal shift when roundoff makes the
/// (nearly singular) matrix fail to factor.
fn regularized_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let diag = (0..n).fold(0.0_f64, |m, i| m.max(a[i * n + i]));
    let mut shift = 0.0;
    let mut shifted = a.to_vec();
    for _ in 0..8 {
        if let Some(x) = cholesky_solve(&shifted, b, n) {
            return Some(x);
        }
        shift = if shift == 0.0 {
            1e-12 * diag.max(1e-300)
        } else {
            shift * 100.0
        };
        for i in 0..n {
            shifted[i * n + i] = a[i * n + i] + shift;
        }
    }
    None
}

fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for p in 0..j {
                sum -= l[i * n + p] * l[j * n + p];
            }
            if i == j {
                if !(sum > 0.0) {
                    return None;
                }
                l[i * n + i] = libm::sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for p in 0..i {
            sum -= l[i * n + p] * y[p];
        }
        y[i] = sum / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut sum = y[i];
        for p in i + 1..n {
            sum -= l[p * n + i] * y[p];
        }
        y[i] = sum / l[i * n + i];
    }
    Some(y)
}
