//! Step-up multiple-testing procedures (BH, Storey–BH, conditional Storey–BH,
//! Storey–BH with discarding) and realized error metrics.

use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::pvalue::{conditional_pvalues, PValueVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Procedure {
    Bh,
    StoreyBh,
    CStoreyBh,
    DStoreyBh,
}

/// Rejections of one procedure, as original hypothesis indices (ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionResult {
    pub rejected: Vec<usize>,
    /// P-value threshold on the scale of the input vector's original p-values.
    pub threshold: f64,
    /// Null proportion used by the procedure (1 for BH).
    pub pi0_hat: f64,
    pub procedure: Procedure,
    pub q: f64,
    pub n_hypotheses: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    pub fdp: f64,
    pub tpp: f64,
}

fn check_level(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(domain("q", q, "inside (0, 1)"))
    }
}

/// Largest ordered p-value with `p_(k) ≤ k q / (m π0)`, if any.
fn step_up_threshold(values: &[f64], q: f64, pi0: f64) -> Option<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .rev()
        .find(|&(k, &p)| p <= (k + 1) as f64 * q / (m * pi0))
        .map(|(_, &p)| p)
}

fn rejected_at(p: &PValueVector, threshold: Option<f64>) -> Vec<usize> {
    let Some(t) = threshold else {
        return Vec::new();
    };
    let mut rejected: Vec<usize> = p
        .values()
        .iter()
        .zip(p.source_indices())
        .filter(|(&v, _)| v <= t)
        .map(|(_, &i)| i)
        .collect();
    rejected.sort_unstable();
    rejected
}

fn step_up(p: &PValueVector, q: f64, pi0: f64, procedure: Procedure) -> RejectionResult {
    let threshold = step_up_threshold(p.values(), q, pi0);
    RejectionResult {
        rejected: rejected_at(p, threshold),
        threshold: threshold.unwrap_or(0.0),
        pi0_hat: pi0,
        procedure,
        q,
        n_hypotheses: p.n_hypotheses(),
    }
}

/// Benjamini–Hochberg step-up at level `q`.
pub fn bh(p: &PValueVector, q: f64) -> Result<RejectionResult> {
    check_level(q)?;
    Ok(step_up(p, q, 1.0, Procedure::Bh))
}

/// Storey's null-proportion estimate `(1 + #{p_i > λ}) / (m (1 - λ))`, uncapped.
pub fn storey_pi0(p: &PValueVector, lambda: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(domain("lambda", lambda, "inside [0, 1)"));
    }
    if p.is_empty() {
        return Err(Error::EmptySample);
    }
    let above = p.values().iter().filter(|&&v| v > lambda).count();
    Ok((1 + above) as f64 / (p.len() as f64 * (1.0 - lambda)))
}

/// Storey–BH: BH with `m` replaced by `m π̄0`, `π̄0 = min(max(π̂0, 1/m), 1)`.
pub fn storey_bh(p: &PValueVector, q: f64, lambda: f64) -> Result<RejectionResult> {
    check_level(q)?;
    if p.is_empty() {
        // Validates lambda even though nothing can be rejected.
        if !(0.0..1.0).contains(&lambda) {
            return Err(domain("lambda", lambda, "inside [0, 1)"));
        }
        return Ok(step_up(p, q, 1.0, Procedure::StoreyBh));
    }
    let raw = storey_pi0(p, lambda)?;
    let pi0 = raw.clamp(1.0 / p.len() as f64, 1.0);
    Ok(step_up(p, q, pi0, Procedure::StoreyBh))
}

/// Conditional Storey–BH: Storey–BH on `{p_i/τ : p_i ≤ τ}`, with `m` the
/// number of retained hypotheses.
pub fn c_storey_bh(p_std: &PValueVector, q: f64, tau: f64, lambda: f64) -> Result<RejectionResult> {
    let conditioned = conditional_pvalues(p_std, tau)?;
    let mut result = storey_bh(&conditioned, q, lambda)?;
    result.procedure = Procedure::CStoreyBh;
    result.threshold *= tau;
    Ok(result)
}

/// Storey–BH with discarding: `π̂0 = (1 + #{λ < p_i ≤ τ}) / (m (τ - λ))` and
/// threshold `ŝ = max{s ≤ τ : m π̂0 s / (#{p_i ≤ s} ∨ 1) ≤ q}`.
///
/// The estimated FDP only jumps at observed p-values and increases between
/// them, so `ŝ` is searched over `{0} ∪ {p_i ≤ τ}`.
pub fn d_storey_bh(p_std: &PValueVector, q: f64, lambda: f64, tau: f64) -> Result<RejectionResult> {
    check_level(q)?;
    if !(lambda >= 0.0 && lambda < tau && tau <= 1.0) {
        return Err(domain("lambda", lambda, "0 ≤ lambda < tau ≤ 1"));
    }
    let values = p_std.values();
    let m = values.len();
    if m == 0 {
        return Ok(RejectionResult {
            rejected: Vec::new(),
            threshold: 0.0,
            pi0_hat: 1.0,
            procedure: Procedure::DStoreyBh,
            q,
            n_hypotheses: p_std.n_hypotheses(),
        });
    }
    let between = values.iter().filter(|&&v| v > lambda && v <= tau).count();
    let pi0 = (1 + between) as f64 / (m as f64 * (tau - lambda));

    let mut candidates: Vec<f64> = values.iter().copied().filter(|&v| v <= tau).collect();
    candidates.sort_by(f64::total_cmp);
    let scale = m as f64 * pi0;
    let mut threshold = 0.0;
    for (k, &s) in candidates.iter().enumerate() {
        // The count at s includes every tied copy, so evaluate on the last one.
        if candidates.get(k + 1) == Some(&s) {
            continue;
        }
        if scale * s / (k + 1) as f64 <= q {
            threshold = s;
        }
    }
    // s = 0 is always admissible; it only rejects exact zeros.
    let rejected = rejected_at(p_std, Some(threshold));
    Ok(RejectionResult {
        rejected,
        threshold,
        pi0_hat: pi0,
        procedure: Procedure::DStoreyBh,
        q,
        n_hypotheses: p_std.n_hypotheses(),
    })
}

/// Realized FDP and TPP; `is_signal[i]` marks hypothesis `i` as non-null.
pub fn compute_metrics(result: &RejectionResult, is_signal: &[bool]) -> Result<ErrorMetrics> {
    if is_signal.len() != result.n_hypotheses {
        return Err(Error::LengthMismatch {
            expected: result.n_hypotheses,
            got: is_signal.len(),
        });
    }
    let true_rejections = result.rejected.iter().filter(|&&i| is_signal[i]).count();
    let false_rejections = result.rejected.len() - true_rejections;
    let signals = is_signal.iter().filter(|&&s| s).count();
    Ok(ErrorMetrics {
        fdp: false_rejections as f64 / result.rejected.len().max(1) as f64,
        tpp: true_rejections as f64 / signals.max(1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pvalue::PValueKind;
    use alloc::vec;

    fn pv(values: Vec<f64>) -> PValueVector {
        PValueVector::new(values, PValueKind::Standard).unwrap()
    }

    #[test]
    fn bh_examples() {
        let r = bh(&pv(vec![0.01, 0.02, 0.5]), 0.1).unwrap();
        assert_eq!(r.rejected, vec![0, 1]);
        assert_eq!(r.threshold, 0.02);
        assert_eq!(r.pi0_hat, 1.0);
        assert!(bh(&pv(vec![1.0; 5]), 0.1).unwrap().rejected.is_empty());
        assert_eq!(bh(&pv(vec![0.0]), 0.1).unwrap().rejected, vec![0]);
        assert!(bh(&pv(vec![0.1]), 0.0).is_err());
        assert!(bh(&pv(vec![0.1]), 1.0).is_err());
    }

    #[test]
    fn bh_ties_rejected_together() {
        let r = bh(&pv(vec![0.04, 0.04, 0.04, 0.9]), 0.1).unwrap();
        assert_eq!(r.rejected, vec![0, 1, 2]);
    }

    #[test]
    fn storey_pi0_examples() {
        let p = pv(vec![0.6, 0.7, 0.2, 0.1]);
        assert!((storey_pi0(&p, 0.5).unwrap() - 1.5).abs() < 1e-15);
        let all_above = pv(vec![0.8, 0.9, 0.95]);
        assert!((storey_pi0(&all_above, 0.5).unwrap() - 4.0 / 1.5).abs() < 1e-15);
        assert!((storey_pi0(&p, 0.0).unwrap() - 5.0 / 4.0).abs() < 1e-15);
        assert!(storey_pi0(&p, 1.0).is_err());
        assert!(storey_pi0(&pv(vec![]), 0.5).is_err());
    }

    #[test]
    fn storey_bh_examples() {
        let p = pv(vec![0.01, 0.02, 0.9, 0.9]);
        let r = storey_bh(&p, 0.1, 0.5).unwrap();
        assert_eq!(r.pi0_hat, 1.0);
        assert_eq!(r.rejected, vec![0, 1]);
        assert_eq!(r.rejected, bh(&p, 0.1).unwrap().rejected);

        let mut values = vec![0.001; 9];
        values.push(0.2);
        let p = pv(values);
        let r = storey_bh(&p, 0.1, 0.5).unwrap();
        assert!((r.pi0_hat - 0.2).abs() < 1e-15);
        let plain = bh(&p, 0.1).unwrap();
        assert!(plain.rejected.iter().all(|i| r.rejected.contains(i)));
        assert_eq!(r.rejected.len(), 10);
    }

    #[test]
    fn storey_pi0_floor() {
        // Raw estimate 1/(m(1-λ)) can fall below 1/m when λ is small.
        let p = pv(vec![0.001, 0.002]);
        let r = storey_bh(&p, 0.1, 0.0).unwrap();
        assert_eq!(r.pi0_hat, 1.0);
        let p = pv(vec![0.001; 10]);
        let r = storey_bh(&p, 0.1, 0.5).unwrap();
        assert!((r.pi0_hat - 0.2).abs() < 1e-15);
    }

    #[test]
    fn c_storey_bh_examples() {
        let p = pv(vec![0.02, 0.03, 0.6, 0.7]);
        let r = c_storey_bh(&p, 0.1, 0.5, 0.5).unwrap();
        assert_eq!(r.rejected, vec![0, 1]);
        assert_eq!(r.pi0_hat, 1.0);
        assert_eq!(r.procedure, Procedure::CStoreyBh);
        assert_eq!(r.n_hypotheses, 4);

        let none = c_storey_bh(&pv(vec![0.6, 0.8]), 0.1, 0.5, 0.5).unwrap();
        assert!(none.rejected.is_empty());

        let q = pv(vec![0.01, 0.2, 0.03, 0.7, 0.9, 0.04]);
        assert_eq!(
            c_storey_bh(&q, 0.1, 1.0, 0.5).unwrap().rejected,
            storey_bh(&q, 0.1, 0.5).unwrap().rejected
        );
    }

    #[test]
    fn d_storey_bh_examples() {
        let p = pv(vec![0.001, 0.002, 0.003, 0.9]);
        let r = d_storey_bh(&p, 0.1, 0.25, 0.5).unwrap();
        assert!((r.pi0_hat - 1.0).abs() < 1e-15);
        assert_eq!(r.rejected, vec![0, 1, 2]);
        assert_eq!(r.threshold, 0.003);

        let none = d_storey_bh(&pv(vec![0.6, 0.7]), 0.1, 0.25, 0.5).unwrap();
        assert!(none.rejected.is_empty());
        assert_eq!(none.threshold, 0.0);

        assert!(d_storey_bh(&p, 0.1, 0.5, 0.5).is_err());
        assert!(d_storey_bh(&p, 0.1, 0.25, 1.5).is_err());
    }

    #[test]
    fn d_storey_bh_full_range_is_uncapped_storey() {
        let p = pv(vec![0.003, 0.2, 0.01, 0.8, 0.45, 0.02, 0.99]);
        let r = d_storey_bh(&p, 0.2, 0.0, 1.0).unwrap();
        let raw = storey_pi0(&p, 0.0).unwrap();
        assert!((r.pi0_hat - raw).abs() < 1e-15);
        let expected = step_up(&p, 0.2, raw, Procedure::StoreyBh);
        assert_eq!(r.rejected, expected.rejected);
    }

    #[test]
    fn metrics_examples() {
        let empty = RejectionResult {
            rejected: vec![],
            threshold: 0.0,
            pi0_hat: 1.0,
            procedure: Procedure::Bh,
            q: 0.1,
            n_hypotheses: 3,
        };
        let m = compute_metrics(&empty, &[false, true, true]).unwrap();
        assert_eq!((m.fdp, m.tpp), (0.0, 0.0));

        let two = RejectionResult {
            rejected: vec![0, 1],
            ..empty.clone()
        };
        let m = compute_metrics(&two, &[false, false, false]).unwrap();
        assert_eq!(m.fdp, 1.0);
        assert_eq!(m.tpp, 0.0);
        let m = compute_metrics(&two, &[false, true, true]).unwrap();
        assert_eq!((m.fdp, m.tpp), (0.5, 0.5));

        assert!(compute_metrics(&two, &[false, true]).is_err());
    }
}
