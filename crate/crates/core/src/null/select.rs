use crate::dist::{
    skew_normal_cdf, skew_normal_pdf, skew_normal_sf, std_normal_cdf, std_normal_pdf,
};
use crate::error::Result;
use crate::sample::StatSample;

use super::gaussian::{fit_gaussian_with, GaussianNull, GaussianOptions};
use super::mixture::{fit_mixture_with, MixtureNull, MixtureOptions};
use super::skew_normal::{fit_skew_normal_with, SkewNormalNull, SkewNormalOptions};
use super::truncation::{resolve_cut, TruncationRule};

/// Candidate null families, ordered from fewest to most parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NullFamily {
    Gaussian,
    SkewNormal,
    FiniteMixture,
}

impl NullFamily {
    pub const ALL: [NullFamily; 3] = [
        NullFamily::Gaussian,
        NullFamily::SkewNormal,
        NullFamily::FiniteMixture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NullFamily::Gaussian => "gaussian",
            NullFamily::SkewNormal => "skew_normal",
            NullFamily::FiniteMixture => "finite_mixture",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedNull {
    Gaussian(GaussianNull),
    SkewNormal(SkewNormalNull),
    FiniteMixture(MixtureNull),
}

impl FittedNull {
    pub fn family(&self) -> NullFamily {
        match self {
            FittedNull::Gaussian(_) => NullFamily::Gaussian,
            FittedNull::SkewNormal(_) => NullFamily::SkewNormal,
            FittedNull::FiniteMixture(_) => NullFamily::FiniteMixture,
        }
    }

    pub fn loglik(&self) -> f64 {
        match self {
            FittedNull::Gaussian(g) => g.loglik,
            FittedNull::SkewNormal(s) => s.loglik,
            FittedNull::FiniteMixture(m) => m.loglik,
        }
    }

    /// Estimated null density `f̂0(z)`.
    pub fn pdf(&self, z: f64) -> f64 {
        match self {
            FittedNull::Gaussian(g) => std_normal_pdf(z - g.mu0),
            FittedNull::SkewNormal(s) => skew_normal_pdf(z, &s.params()),
            FittedNull::FiniteMixture(m) => m
                .weights_p
                .iter()
                .zip(&m.grid)
                .map(|(p, mu)| p * std_normal_pdf(z - mu))
                .sum(),
        }
    }

    /// Estimated null distribution function `F̂0(z)`.
    pub fn cdf(&self, z: f64) -> f64 {
        let value = match self {
            FittedNull::Gaussian(g) => std_normal_cdf(z - g.mu0),
            FittedNull::SkewNormal(s) => skew_normal_cdf(z, &s.params()),
            FittedNull::FiniteMixture(m) => m
                .weights_p
                .iter()
                .zip(&m.grid)
                .map(|(p, mu)| p * std_normal_cdf(z - mu))
                .sum(),
        };
        value.clamp(0.0, 1.0)
    }

    /// `1 - F̂0(z)`, evaluated on the upper tail directly.
    pub fn sf(&self, z: f64) -> f64 {
        let value = match self {
            FittedNull::Gaussian(g) => std_normal_cdf(g.mu0 - z),
            FittedNull::SkewNormal(s) => skew_normal_sf(z, &s.params()),
            FittedNull::FiniteMixture(m) => m
                .weights_p
                .iter()
                .zip(&m.grid)
                .map(|(p, mu)| p * std_normal_cdf(mu - z))
                .sum(),
        };
        value.clamp(0.0, 1.0)
    }
}

/// Truncated-sample log-likelihood of each family; `None` when its fit failed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FamilyLogliks {
    pub gaussian: Option<f64>,
    pub skew_normal: Option<f64>,
    pub finite_mixture: Option<f64>,
}

impl FamilyLogliks {
    pub fn get(&self, family: NullFamily) -> Option<f64> {
        match family {
            NullFamily::Gaussian => self.gaussian,
            NullFamily::SkewNormal => self.skew_normal,
            NullFamily::FiniteMixture => self.finite_mixture,
        }
    }
}

/// The selected null together with the truncation it was fitted on.
#[derive(Debug, Clone, PartialEq)]
pub struct NullModel {
    pub fitted: FittedNull,
    pub cut: f64,
    pub n_truncated: usize,
    pub logliks: FamilyLogliks,
}

impl NullModel {
    /// Wraps an already fitted null, e.g. one restored from a report.
    pub fn from_fitted(fitted: FittedNull, cut: f64, n_truncated: usize) -> Self {
        let mut logliks = FamilyLogliks::default();
        match fitted.family() {
            NullFamily::Gaussian => logliks.gaussian = Some(fitted.loglik()),
            NullFamily::SkewNormal => logliks.skew_normal = Some(fitted.loglik()),
            NullFamily::FiniteMixture => logliks.finite_mixture = Some(fitted.loglik()),
        }
        Self {
            fitted,
            cut,
            n_truncated,
            logliks,
        }
    }

    pub fn family(&self) -> NullFamily {
        self.fitted.family()
    }

    pub fn cdf(&self, z: f64) -> f64 {
        self.fitted.cdf(z)
    }

    pub fn sf(&self, z: f64) -> f64 {
        self.fitted.sf(z)
    }

    pub fn pdf(&self, z: f64) -> f64 {
        self.fitted.pdf(z)
    }
}

/// `F̂0(z)` of a selected model.
pub fn null_cdf(model: &NullModel, z: f64) -> f64 {
    model.cdf(z)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelectOptions {
    pub truncation: TruncationRule,
    pub gaussian: GaussianOptions,
    pub skew_normal: SkewNormalOptions,
    pub mixture: MixtureOptions,
}

impl SelectOptions {
    pub fn with_mixture_k(mut self, k: usize) -> Self {
        self.mixture.k = k;
        self
    }
}

/// Fits all three families on the same truncated sample and keeps the one
/// with the largest log-likelihood. Exact ties go to the simpler family.
/// A family whose fit fails is skipped; if all fail, the first error is returned.
pub fn select_null(sample: &StatSample, options: &SelectOptions) -> Result<NullModel> {
    let cut = resolve_cut(sample, options.truncation)?;
    let n_truncated = sample.truncated(cut).len();

    let fits = [
        fit_gaussian_with(sample, cut, options.gaussian).map(FittedNull::Gaussian),
        fit_skew_normal_with(sample, cut, options.skew_normal).map(FittedNull::SkewNormal),
        fit_mixture_with(sample, cut, &options.mixture).map(FittedNull::FiniteMixture),
    ];

    let mut logliks = FamilyLogliks::default();
    let mut best: Option<FittedNull> = None;
    let mut first_error = None;
    for fit in fits {
        match fit {
            Ok(fitted) => {
                let value = fitted.loglik();
                match fitted.family() {
                    NullFamily::Gaussian => logliks.gaussian = Some(value),
                    NullFamily::SkewNormal => logliks.skew_normal = Some(value),
                    NullFamily::FiniteMixture => logliks.finite_mixture = Some(value),
                }
                let better = match &best {
                    None => true,
                    Some(current) => value > current.loglik(),
                };
                if better {
                    best = Some(fitted);
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }

    match best {
        Some(fitted) => Ok(NullModel {
            fitted,
            cut,
            n_truncated,
            logliks,
        }),
        None => Err(first_error.expect("at least one fit ran")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn gaussian(mu0: f64) -> FittedNull {
        FittedNull::Gaussian(GaussianNull {
            mu0,
            mu0_unconstrained: mu0,
            loglik: 0.0,
            iterations: 0,
            converged: true,
        })
    }

    #[test]
    fn gaussian_cdf_forms() {
        let m = NullModel::from_fitted(gaussian(0.0), 1.0, 10);
        for z in [-3.0, -0.4, 0.0, 2.2] {
            assert_eq!(null_cdf(&m, z), std_normal_cdf(z));
            assert_eq!(m.sf(z), std_normal_cdf(-z));
        }
    }

    #[test]
    fn single_atom_mixture() {
        let fitted = FittedNull::FiniteMixture(MixtureNull {
            grid: vec![-1.0, -0.5, 0.0],
            weights_p: vec![1.0, 0.0, 0.0],
            weights_eta: vec![1.0, 0.0, 0.0],
            loglik: 0.0,
            iterations: 0,
            converged: true,
            gap: 0.0,
        });
        let m = NullModel::from_fitted(fitted, 0.0, 3);
        for z in [-2.0, 0.0, 1.5] {
            assert!((m.cdf(z) - std_normal_cdf(z + 1.0)).abs() < 1e-16);
        }
    }

    #[test]
    fn skew_normal_at_zero() {
        let fitted = FittedNull::SkewNormal(SkewNormalNull {
            sigma0: 1.0,
            eta: 0.0,
            loglik: 0.0,
            at_boundary: false,
            evaluations: 0,
        });
        let m = NullModel::from_fitted(fitted, 0.0, 3);
        assert!((m.cdf(0.0) - 0.75).abs() < 1e-15);
    }
}
