//! Monte Carlo harness: data from the hierarchical model, all methods per
//! replication, and FDR/TPR aggregation.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dist::{skew_normal_sf, std_normal_pdf, std_normal_sf, SkewNormalParams};
use crate::error::{domain, Error, Result};
use crate::null::{select_null, NullModel, SelectOptions};
use crate::procedures::{bh, c_storey_bh, compute_metrics, d_storey_bh, storey_bh, ErrorMetrics};
use crate::pvalue::{eb_pvalues, standard_pvalues, PValueVector};
use crate::sample::StatSample;

/// Prior on the non-positive means of null hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NullPrior {
    /// Atom at −1 with probability `rho`, otherwise at 0.
    TwoPoint { rho: f64 },
    /// `−|X|` with `X ~ N(0, sigma0²)`.
    TruncGauss { sigma0: f64 },
}

impl NullPrior {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NullPrior::TwoPoint { rho } if !(0.0..=1.0).contains(&rho) => {
                Err(domain("rho", rho, "inside [0, 1]"))
            }
            NullPrior::TruncGauss { sigma0 } if !(sigma0 > 0.0 && sigma0.is_finite()) => {
                Err(domain("sigma0", sigma0, "finite and > 0"))
            }
            _ => Ok(()),
        }
    }

    /// Survival function of the true marginal null of `Z`.
    pub fn null_sf(&self, z: f64) -> f64 {
        match *self {
            NullPrior::TwoPoint { rho } => {
                rho * std_normal_sf(z + 1.0) + (1.0 - rho) * std_normal_sf(z)
            }
            NullPrior::TruncGauss { sigma0 } => match SkewNormalParams::from_sigma0(sigma0) {
                Ok(params) => skew_normal_sf(z, &params),
                Err(_) => f64::NAN,
            },
        }
    }

    pub fn null_cdf(&self, z: f64) -> f64 {
        1.0 - self.null_sf(z)
    }

    fn draw_mean<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            NullPrior::TwoPoint { rho } => {
                if rng.random::<f64>() < rho {
                    -1.0
                } else {
                    0.0
                }
            }
            NullPrior::TruncGauss { sigma0 } => {
                let x: f64 = rng.sample(StandardNormal);
                -(sigma0 * x).abs()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub m: usize,
    pub pi0: f64,
    pub q: f64,
    pub null_prior: NullPrior,
    /// Location of the point-mass alternative.
    pub alt_location: f64,
    pub n_reps: usize,
    pub base_seed: u64,
}

impl Default for SimScenario {
    fn default() -> Self {
        Self {
            m: 5000,
            pi0: 0.9,
            q: 0.1,
            null_prior: NullPrior::TwoPoint { rho: 0.0 },
            alt_location: 3.0,
            n_reps: 200,
            base_seed: 0,
        }
    }
}

impl SimScenario {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::EmptySample);
        }
        if !(self.pi0 > 0.0 && self.pi0 <= 1.0) {
            return Err(domain("pi0", self.pi0, "inside (0, 1]"));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(domain("q", self.q, "inside (0, 1)"));
        }
        if !self.alt_location.is_finite() {
            return Err(domain("alt_location", self.alt_location, "finite"));
        }
        self.null_prior.validate()
    }
}

/// Tuning shared by the procedures of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSettings {
    /// Conditioning level for C-StBH and D-StBH.
    pub tau: f64,
    /// λ for Storey–BH, C-StBH and the proposed method.
    pub lambda_storey: f64,
    /// λ for D-StBH.
    pub lambda_discard: f64,
    pub select: SelectOptions,
}

impl Default for MethodSettings {
    fn default() -> Self {
        Self {
            tau: 0.5,
            lambda_storey: 0.5,
            lambda_discard: 0.25,
            select: SelectOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bh,
    StBh,
    CStBh,
    DStBh,
    /// Null selected from the data, empirical-Bayes p-values, then Storey–BH.
    Proposed,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Bh,
        Method::StBh,
        Method::CStBh,
        Method::DStBh,
        Method::Proposed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Bh => "bh",
            Method::StBh => "stbh",
            Method::CStBh => "c-stbh",
            Method::DStBh => "d-stbh",
            Method::Proposed => "proposed",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == name)
    }
}

/// Independent generator for replication `rep`: one ChaCha8 stream per index.
pub fn replication_rng(base_seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(rep);
    rng
}

/// Draws one data set with ground-truth labels (`true` marks a signal).
pub fn generate(scenario: &SimScenario, rep: usize) -> StatSample {
    let mut rng = replication_rng(scenario.base_seed, rep as u64);
    let mut values = Vec::with_capacity(scenario.m);
    let mut is_signal = Vec::with_capacity(scenario.m);
    for _ in 0..scenario.m {
        let signal = rng.random::<f64>() >= scenario.pi0;
        let mean = if signal {
            scenario.alt_location
        } else {
            scenario.null_prior.draw_mean(&mut rng)
        };
        let noise: f64 = rng.sample(StandardNormal);
        values.push(mean + noise);
        is_signal.push(signal);
    }
    StatSample::with_truth(values, is_signal).expect("generated statistics are finite")
}

/// Runs one method on a sample; the proposed method also returns its null fit.
pub fn run_method(
    method: Method,
    sample: &StatSample,
    p_std: &PValueVector,
    q: f64,
    settings: &MethodSettings,
) -> Result<crate::procedures::RejectionResult> {
    match method {
        Method::Bh => bh(p_std, q),
        Method::StBh => storey_bh(p_std, q, settings.lambda_storey),
        Method::CStBh => c_storey_bh(p_std, q, settings.tau, settings.lambda_storey),
        Method::DStBh => d_storey_bh(p_std, q, settings.lambda_discard, settings.tau),
        Method::Proposed => {
            let model = select_null(sample, &settings.select)?;
            storey_bh(&eb_pvalues(sample, &model), q, settings.lambda_storey)
        }
    }
}

/// Realized metrics of each requested method on one replication, in the
/// order of `methods`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub metrics: Vec<ErrorMetrics>,
}

pub fn run_replication(
    scenario: &SimScenario,
    settings: &MethodSettings,
    methods: &[Method],
    rep: usize,
) -> Result<ReplicationRecord> {
    let sample = generate(scenario, rep);
    let truth = sample.truth().expect("generated samples carry labels");
    let p_std = standard_pvalues(&sample);
    let metrics = methods
        .iter()
        .map(|&method| {
            let result = run_method(method, &sample, &p_std, scenario.q, settings)?;
            compute_metrics(&result, truth)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicationRecord { rep, metrics })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub fdr: f64,
    pub fdr_se: f64,
    pub tpr: f64,
    pub tpr_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub methods: Vec<MethodSummary>,
    /// Replications that contributed to the averages.
    pub n_reps: usize,
    /// Replications that failed, with their index and error.
    pub failures: Vec<(usize, Error)>,
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1) as f64 / n as f64))
}

/// Averages replication records in the order given. Feeding records in
/// replication order makes the result independent of how they were computed.
pub fn summarize(methods: &[Method], records: &[Result<ReplicationRecord>]) -> SimSummary {
    let ok: Vec<&ReplicationRecord> = records.iter().filter_map(|r| r.as_ref().ok()).collect();
    let failures = records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().err().map(|e| (i, e.clone())))
        .collect();
    let summaries = methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let (fdr, fdr_se) = mean_and_se(ok.iter().map(move |r| r.metrics[j].fdp));
            let (tpr, tpr_se) = mean_and_se(ok.iter().map(move |r| r.metrics[j].tpp));
            MethodSummary {
                method,
                fdr,
                fdr_se,
                tpr,
                tpr_se,
            }
        })
        .collect();
    SimSummary {
        methods: summaries,
        n_reps: ok.len(),
        failures,
    }
}

/// Sequential driver over `scenario.n_reps` replications.
pub fn run_scenario(
    scenario: &SimScenario,
    settings: &MethodSettings,
    methods: &[Method],
) -> Result<SimSummary> {
    scenario.validate()?;
    if scenario.n_reps == 0 {
        return Err(Error::InsufficientData { got: 0, need: 1 });
    }
    let records: Vec<_> = (0..scenario.n_reps)
        .map(|rep| run_replication(scenario, settings, methods, rep))
        .collect();
    Ok(summarize(methods, &records))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `bins + 1` equally spaced edges from 0 to 1.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Equal-width bins on [0, 1]: the first is `[0, 1/b]`, the rest `(k/b, (k+1)/b]`.
pub fn pvalue_histogram(p: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InsufficientData { got: 0, need: 1 });
    }
    let b = bins as f64;
    let edges = (0..=bins).map(|k| k as f64 / b).collect();
    let mut counts = alloc::vec![0usize; bins];
    for &v in p {
        let idx = (libm::ceil(v * b) as isize - 1).clamp(0, bins as isize - 1) as usize;
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOverlay {
    pub grid: Vec<f64>,
    /// `π̂0 f̂0(z)` from the fitted null.
    pub estimated_null: Vec<f64>,
    /// `π̂0 φ(z)`.
    pub standard_null: Vec<f64>,
}

/// Scaled fitted and theoretical null densities on an even grid over
/// `[min Z − 1, max Z + 1]`.
pub fn density_overlay(
    sample: &StatSample,
    model: &NullModel,
    pi0_hat: f64,
    grid_points: usize,
) -> Result<DensityOverlay> {
    let (Some(lo), Some(hi)) = (sample.min(), sample.max()) else {
        return Err(Error::EmptySample);
    };
    let (lo, hi) = (lo - 1.0, hi + 1.0);
    let step = if grid_points > 1 {
        (hi - lo) / (grid_points - 1) as f64
    } else {
        0.0
    };
    let grid: Vec<f64> = (0..grid_points).map(|i| lo + i as f64 * step).collect();
    Ok(DensityOverlay {
        estimated_null: grid.iter().map(|&z| pi0_hat * model.pdf(z)).collect(),
        standard_null: grid.iter().map(|&z| pi0_hat * std_normal_pdf(z)).collect(),
        grid,
    })
}

/// One-sample Kolmogorov–Smirnov statistic against Uniform(0, 1).
pub fn ks_uniform_statistic(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let x = x.clamp(0.0, 1.0);
        d.max((i + 1) as f64 / n - x).max(x - i as f64 / n)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::null::{FittedNull, GaussianNull};
    use alloc::vec;

    fn small(prior: NullPrior) -> SimScenario {
        SimScenario {
            m: 2000,
            null_prior: prior,
            n_reps: 1,
            base_seed: 7,
            ..SimScenario::default()
        }
    }

    #[test]
    fn generation_is_deterministic_and_labelled() {
        let s = small(NullPrior::TwoPoint { rho: 0.3 });
        let a = generate(&s, 3);
        let b = generate(&s, 3);
        assert_eq!(a, b);
        assert_ne!(a, generate(&s, 4));
        let signals = a.truth().unwrap().iter().filter(|&&x| x).count();
        assert!((100..=300).contains(&signals));
    }

    #[test]
    fn two_point_extremes() {
        // With all-null data the statistic minus its noise is the prior draw.
        let s = SimScenario {
            pi0: 1.0,
            ..small(NullPrior::TwoPoint { rho: 1.0 })
        };
        let z = generate(&s, 0);
        let mean = z.values().iter().sum::<f64>() / z.len() as f64;
        assert!((mean + 1.0).abs() < 0.1);
        let s = SimScenario {
            pi0: 1.0,
            ..small(NullPrior::TwoPoint { rho: 0.0 })
        };
        let z = generate(&s, 0);
        let mean = z.values().iter().sum::<f64>() / z.len() as f64;
        assert!(mean.abs() < 0.1);
    }

    #[test]
    fn scenario_validation() {
        assert!(SimScenario::default().validate().is_ok());
        assert!(small(NullPrior::TwoPoint { rho: 1.5 }).validate().is_err());
        assert!(small(NullPrior::TruncGauss { sigma0: 0.0 })
            .validate()
            .is_err());
        let bad = SimScenario {
            pi0: 0.0,
            ..SimScenario::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn run_scenario_is_rerun_identical() {
        let s = small(NullPrior::TwoPoint { rho: 0.0 });
        let settings = MethodSettings::default();
        let a = run_scenario(&s, &settings, &Method::ALL).unwrap();
        let b = run_scenario(&s, &settings, &Method::ALL).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_reps, 1);
        assert!(a.failures.is_empty());
        for m in &a.methods {
            assert!((0.0..=1.0).contains(&m.fdr) && (0.0..=1.0).contains(&m.tpr));
            assert_eq!(m.fdr_se, 0.0);
        }
    }

    #[test]
    fn all_null_scenario_has_zero_power() {
        let s = SimScenario {
            pi0: 1.0,
            ..small(NullPrior::TwoPoint { rho: 0.5 })
        };
        let summary = run_scenario(&s, &MethodSettings::default(), &Method::ALL).unwrap();
        assert!(summary.methods.iter().all(|m| m.tpr == 0.0));
    }

    #[test]
    fn summarize_counts_failures() {
        let methods = [Method::Bh];
        let rec = |rep, fdp| {
            Ok(ReplicationRecord {
                rep,
                metrics: vec![ErrorMetrics { fdp, tpp: 0.5 }],
            })
        };
        let records = vec![rec(0, 0.0), Err(Error::EmptySample), rec(2, 0.2)];
        let s = summarize(&methods, &records);
        assert_eq!(s.n_reps, 2);
        assert_eq!(s.failures, vec![(1, Error::EmptySample)]);
        assert!((s.methods[0].fdr - 0.1).abs() < 1e-15);
        // sd = sqrt(0.02), se = sd / sqrt(2) = 0.1
        assert!((s.methods[0].fdr_se - 0.1).abs() < 1e-15);
        assert_eq!(s.methods[0].tpr_se, 0.0);
    }

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(Method::from_name(m.name()), Some(m));
        }
        assert_eq!(Method::from_name("nope"), None);
    }

    #[test]
    fn histogram_binning() {
        let p: Vec<f64> = (0..50).map(|i| (2 * i + 1) as f64 / 100.0).collect();
        let h = pvalue_histogram(&p, 50).unwrap();
        assert_eq!(h.edges.len(), 51);
        assert!(h.counts.iter().all(|&c| c == 1));

        let h = pvalue_histogram(&[1.0, 1.0, 1.0], 50).unwrap();
        assert_eq!(h.counts[49], 3);
        let h = pvalue_histogram(&[0.0, 0.5, 0.25], 2).unwrap();
        assert_eq!(h.counts, vec![3, 0]);
        let h = pvalue_histogram(&[], 10).unwrap();
        assert!(h.counts.iter().all(|&c| c == 0));
        assert!(pvalue_histogram(&[0.5], 0).is_err());
    }

    fn standard_model() -> NullModel {
        let fit = GaussianNull {
            mu0: 0.0,
            mu0_unconstrained: 0.1,
            loglik: -1.0,
            iterations: 1,
            converged: true,
        };
        NullModel::from_fitted(FittedNull::Gaussian(fit), 1.0, 10)
    }

    #[test]
    fn overlay_curves() {
        let sample = StatSample::new(vec![-2.0, 0.0, 3.0]).unwrap();
        let model = standard_model();
        let o = density_overlay(&sample, &model, 1.0, 200).unwrap();
        assert_eq!(o.grid.len(), 200);
        assert_eq!(o.grid[0], -3.0);
        assert!((o.grid[199] - 4.0).abs() < 1e-12);
        for (a, b) in o.estimated_null.iter().zip(&o.standard_null) {
            assert!((a - b).abs() < 1e-15);
        }
        let zero = density_overlay(&sample, &model, 0.0, 50).unwrap();
        assert!(zero
            .estimated_null
            .iter()
            .chain(&zero.standard_null)
            .all(|&v| v == 0.0));
    }

    #[test]
    fn ks_statistic() {
        assert_eq!(ks_uniform_statistic(&[]), 0.0);
        assert!((ks_uniform_statistic(&[0.5]) - 0.5).abs() < 1e-15);
        let grid: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_uniform_statistic(&grid) - 0.005).abs() < 1e-12);
        assert!((ks_uniform_statistic(&[0.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn true_null_survival() {
        let p = NullPrior::TwoPoint { rho: 1.0 };
        assert!((p.null_sf(-1.0) - 0.5).abs() < 1e-15);
        let p = NullPrior::TwoPoint { rho: 0.0 };
        assert!((p.null_cdf(1.0) - crate::dist::std_normal_cdf(1.0)).abs() < 1e-15);
        let p = NullPrior::TruncGauss { sigma0: 1.0 };
        // Location point of SN(0, √2, −1): cdf is 3/4.
        assert!((p.null_cdf(0.0) - 0.75).abs() < 1e-12);
    }
}
