//! Estimation of the marginal null distribution from the statistics below a
//! truncation point, under three prior families, and likelihood-based selection.

mod gaussian;
mod mixture;
mod select;
mod skew_normal;
mod truncation;

pub use gaussian::{
    fit_gaussian, fit_gaussian_with, gaussian_null_loglik, GaussianNull, GaussianOptions,
};
pub use mixture::{
    default_grid, eta_to_p, fit_mixture, fit_mixture_with, mixture_null_loglik, p_to_eta,
    MixtureNull, MixtureOptions, MixtureSolver,
};
pub use select::{
    null_cdf, select_null, FamilyLogliks, FittedNull, NullFamily, NullModel, SelectOptions,
};
pub use skew_normal::{
    fit_skew_normal, fit_skew_normal_with, skew_normal_null_loglik, SkewNormalNull,
    SkewNormalOptions,
};
pub use truncation::{resolve_cut, sample_quantile, TruncationRule};
