//! One-sided p-value families: standard, oracle, empirical-Bayes and
//! conditional (rescaled after discarding large values).

use alloc::vec::Vec;

use crate::dist::std_normal_sf;
use crate::error::{domain, Result};
use crate::null::NullModel;
use crate::sample::StatSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PValueKind {
    /// `1 - Φ(Z_i)`.
    Standard,
    /// `1 - F0(Z_i)` under a known null.
    Oracle,
    /// `1 - F̂0(Z_i)` under an estimated null.
    EmpiricalBayes,
    /// `p_i / τ` for the hypotheses with `p_i ≤ τ`.
    ConditionalRescaled { tau: f64 },
}

/// Per-hypothesis p-values. `source_indices[j]` is the original hypothesis
/// index of `values[j]`; it is the identity unless the vector was conditioned.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueVector {
    values: Vec<f64>,
    kind: PValueKind,
    source_indices: Vec<usize>,
    n_hypotheses: usize,
}

impl PValueVector {
    /// Wraps raw p-values; each must lie in `[0, 1]`.
    pub fn new(values: Vec<f64>, kind: PValueKind) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(domain("p-value", bad, "inside [0, 1]"));
        }
        let source_indices = (0..values.len()).collect();
        Ok(Self {
            n_hypotheses: values.len(),
            values,
            kind,
            source_indices,
        })
    }

    fn from_clamped(values: impl Iterator<Item = f64>, kind: PValueKind) -> Self {
        let values: Vec<f64> = values.map(|p| p.clamp(0.0, 1.0)).collect();
        let source_indices = (0..values.len()).collect();
        Self {
            n_hypotheses: values.len(),
            values,
            kind,
            source_indices,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> PValueKind {
        self.kind
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    /// Size of the original hypothesis family (before any conditioning).
    pub fn n_hypotheses(&self) -> usize {
        self.n_hypotheses
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn standard_pvalues(sample: &StatSample) -> PValueVector {
    PValueVector::from_clamped(
        sample.values().iter().map(|&z| std_normal_sf(z)),
        PValueKind::Standard,
    )
}

/// P-values under a known null distribution function.
pub fn oracle_pvalues<F: Fn(f64) -> f64>(sample: &StatSample, true_null_cdf: F) -> PValueVector {
    PValueVector::from_clamped(
        sample.values().iter().map(|&z| 1.0 - true_null_cdf(z)),
        PValueKind::Oracle,
    )
}

/// Oracle p-values from a survival function `1 - F0`, avoiding cancellation
/// in the upper tail.
pub fn oracle_pvalues_from_sf<F: Fn(f64) -> f64>(
    sample: &StatSample,
    true_null_sf: F,
) -> PValueVector {
    PValueVector::from_clamped(
        sample.values().iter().map(|&z| true_null_sf(z)),
        PValueKind::Oracle,
    )
}

pub fn eb_pvalues(sample: &StatSample, model: &NullModel) -> PValueVector {
    PValueVector::from_clamped(
        sample.values().iter().map(|&z| model.sf(z)),
        PValueKind::EmpiricalBayes,
    )
}

/// Keeps `p_i ≤ τ` and rescales them to `p_i / τ`, remembering where each came from.
pub fn conditional_pvalues(p: &PValueVector, tau: f64) -> Result<PValueVector> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(domain("tau", tau, "inside (0, 1]"));
    }
    let (values, source_indices) = p
        .values
        .iter()
        .zip(&p.source_indices)
        .filter(|(&v, _)| v <= tau)
        .map(|(&v, &i)| ((v / tau).min(1.0), i))
        .unzip();
    Ok(PValueVector {
        values,
        kind: PValueKind::ConditionalRescaled { tau },
        source_indices,
        n_hypotheses: p.n_hypotheses,
    })
}
