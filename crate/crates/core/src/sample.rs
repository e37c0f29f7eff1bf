use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Observed one-sided test statistics `Z_1, …, Z_m`, optionally carrying
/// ground-truth labels (`true` marks a non-null hypothesis) when simulated.
#[derive(Debug, Clone, PartialEq)]
pub struct StatSample {
    values: Vec<f64>,
    is_signal: Option<Vec<bool>>,
}

impl StatSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            values,
            is_signal: None,
        })
    }

    pub fn with_truth(values: Vec<f64>, is_signal: Vec<bool>) -> Result<Self> {
        if values.len() != is_signal.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                got: is_signal.len(),
            });
        }
        let mut sample = Self::new(values)?;
        sample.is_signal = Some(is_signal);
        Ok(sample)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn truth(&self) -> Option<&[bool]> {
        self.is_signal.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::min)
    }

    pub fn max(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    /// Statistics at or below `cut`, in input order.
    pub fn truncated(&self, cut: f64) -> Vec<f64> {
        self.values.iter().copied().filter(|&z| z <= cut).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_non_finite() {
        assert_eq!(
            StatSample::new(vec![1.0, f64::NAN]).unwrap_err(),
            Error::NonFinite { index: 1 }
        );
        assert!(StatSample::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn truth_length_checked() {
        assert!(StatSample::with_truth(vec![1.0, 2.0], vec![true]).is_err());
        let s = StatSample::with_truth(vec![1.0, 2.0], vec![true, false]).unwrap();
        assert_eq!(s.truth(), Some(&[true, false][..]));
    }

    #[test]
    fn extremes_and_truncation() {
        let s = StatSample::new(vec![0.5, -2.0, 3.0, 0.0]).unwrap();
        assert_eq!(s.min(), Some(-2.0));
        assert_eq!(s.max(), Some(3.0));
        assert_eq!(s.truncated(0.5), vec![0.5, -2.0, 0.0]);
        assert_eq!(StatSample::new(vec![]).unwrap().min(), None);
    }
}
