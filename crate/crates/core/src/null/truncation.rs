use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::sample::StatSample;

/// How the truncation point `ξ` of the zero assumption is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationRule {
    /// Sample quantile of the observed statistics at this level.
    Quantile(f64),
    /// A fixed cut supplied by the caller.
    Cut(f64),
}

impl Default for TruncationRule {
    fn default() -> Self {
        TruncationRule::Quantile(0.85)
    }
}

/// Linear-interpolation sample quantile (Hyndman–Fan type 7).
pub fn sample_quantile(values: &[f64], level: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(domain("quantile_level", level, "strictly inside (0, 1)"));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * level;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Resolves the truncation point `ξ` and checks that `{i : Z_i ≤ ξ}` is nonempty.
pub fn resolve_cut(sample: &StatSample, rule: TruncationRule) -> Result<f64> {
    let min = sample.min().ok_or(Error::EmptySample)?;
    let cut = match rule {
        TruncationRule::Quantile(level) => sample_quantile(sample.values(), level)?,
        TruncationRule::Cut(cut) => {
            if !cut.is_finite() {
                return Err(domain("cut", cut, "finite"));
            }
            cut
        }
    };
    if cut < min {
        return Err(Error::EmptyTruncatedSet { cut, min });
    }
    Ok(cut)
}

/// Statistics at or below `cut`; at least `need` of them are required.
pub(crate) fn truncated_set(sample: &StatSample, cut: f64, need: usize) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if cut.is_nan() {
        return Err(domain("cut", cut, "a number"));
    }
    let kept = sample.truncated(cut);
    if kept.len() < need {
        return Err(Error::InsufficientData {
            got: kept.len(),
            need,
        });
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample(values: Vec<f64>) -> StatSample {
        StatSample::new(values).unwrap()
    }

    #[test]
    fn quantile_of_evenly_spaced_sample() {
        // (-2, -1, ..., 17): h = 19 * 0.85 = 16.15 → 14 + 0.15 * (15 - 14).
        let s = sample((-2..=17).map(f64::from).collect());
        let xi = resolve_cut(&s, TruncationRule::Quantile(0.85)).unwrap();
        assert!((xi - 14.15).abs() < 1e-12);
        assert_eq!(s.truncated(xi).len(), 17);
    }

    #[test]
    fn explicit_cut_and_constant_sample() {
        let s = sample(vec![-1.0, 0.5, 2.0]);
        assert_eq!(resolve_cut(&s, TruncationRule::Cut(0.0)).unwrap(), 0.0);
        let zeros = sample(vec![0.0; 10]);
        let xi = resolve_cut(&zeros, TruncationRule::default()).unwrap();
        assert_eq!(xi, 0.0);
        assert_eq!(zeros.truncated(xi).len(), 10);
    }

    #[test]
    fn errors() {
        let empty = sample(vec![]);
        assert_eq!(
            resolve_cut(&empty, TruncationRule::default()),
            Err(Error::EmptySample)
        );
        let s = sample(vec![1.0, 2.0]);
        assert!(matches!(
            resolve_cut(&s, TruncationRule::Cut(0.5)),
            Err(Error::EmptyTruncatedSet { .. })
        ));
        assert!(resolve_cut(&s, TruncationRule::Quantile(1.0)).is_err());
        assert!(resolve_cut(&s, TruncationRule::Quantile(0.0)).is_err());
        assert!(resolve_cut(&s, TruncationRule::Cut(f64::INFINITY)).is_err());
    }
}
