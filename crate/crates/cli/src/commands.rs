//! Subcommand definitions and their implementations. Each command renders its
//! whole output as a string so it can be written to a file or stdout.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ebnull_core::null::{select_null, FittedNull, NullModel, SelectOptions, TruncationRule};
use ebnull_core::procedures::RejectionResult;
use ebnull_core::pvalue::{eb_pvalues, standard_pvalues};
use ebnull_core::sim::{
    pvalue_histogram, run_method, Method, MethodSettings, NullPrior, SimScenario,
};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::ingest::{ingest_statistics, Statistics};
use crate::parallel::run_scenario_parallel;
use crate::report::{csv_with_config, fmt_f64, to_json};
use crate::tstats::{tstats_from_csv, Variance};

#[derive(Debug, Parser)]
#[command(
    name = "ebnull",
    version,
    about = "Empirical-Bayes null estimation and FDR testing for one-sided z-statistics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the three null families below the truncation point and report the selected one.
    FitNull(FitNullArgs),
    /// Fit the null, compute p-values and run the chosen procedures.
    Test(TestArgs),
    /// Monte Carlo FDR and TPR over a grid of null priors.
    Simulate(SimulateArgs),
    /// Binned standard and empirical-Bayes p-values.
    Histogram(HistogramArgs),
    /// Two-sample t-statistics from a feature-by-sample CSV matrix.
    Tstats(TstatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum MethodArg {
    #[value(name = "bh")]
    #[serde(rename = "bh")]
    Bh,
    #[value(name = "stbh")]
    #[serde(rename = "stbh")]
    StBh,
    #[value(name = "c-stbh")]
    #[serde(rename = "c-stbh")]
    CStBh,
    #[value(name = "d-stbh")]
    #[serde(rename = "d-stbh")]
    DStBh,
    #[value(name = "proposed")]
    #[serde(rename = "proposed")]
    Proposed,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Bh => Method::Bh,
            MethodArg::StBh => Method::StBh,
            MethodArg::CStBh => Method::CStBh,
            MethodArg::DStBh => Method::DStBh,
            MethodArg::Proposed => Method::Proposed,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NullArgs {
    /// Quantile of the statistics used as truncation point.
    #[arg(long, default_value_t = 0.85)]
    pub xi_quantile: f64,
    /// Number of support points of the finite-mixture null.
    #[arg(long, default_value_t = 50)]
    pub k: usize,
}

impl NullArgs {
    fn select_options(&self) -> SelectOptions {
        SelectOptions {
            truncation: TruncationRule::Quantile(self.xi_quantile),
            ..SelectOptions::default()
        }
        .with_mixture_k(self.k)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProcedureArgs {
    /// Target FDR level.
    #[arg(long, default_value_t = 0.1)]
    pub q: f64,
    /// Conditioning level of C-StBH and D-StBH.
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// λ of Storey's estimator (StBH, C-StBH, proposed).
    #[arg(long, default_value_t = 0.5)]
    pub lambda_storey: f64,
    /// λ of D-StBH.
    #[arg(long, default_value_t = 0.25)]
    pub lambda_discard: f64,
}

impl ProcedureArgs {
    fn settings(&self, null: &NullArgs) -> MethodSettings {
        MethodSettings {
            tau: self.tau,
            lambda_storey: self.lambda_storey,
            lambda_discard: self.lambda_discard,
            select: null.select_options(),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitNullArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub null: NullArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Procedures to run; repeat the flag for several. Comparators use standard p-values.
    #[arg(long = "method", value_enum, default_values_t = [MethodArg::Proposed])]
    pub methods: Vec<MethodArg>,
    #[command(flatten)]
    #[serde(flatten)]
    pub procedure: ProcedureArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub null: NullArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long = "method", value_enum, default_values_t = [
        MethodArg::Bh, MethodArg::StBh, MethodArg::CStBh, MethodArg::DStBh, MethodArg::Proposed
    ])]
    pub methods: Vec<MethodArg>,
    /// Comma-separated probabilities of the −1 atom in the two-point null prior.
    #[arg(long, value_delimiter = ',')]
    pub rho_grid: Option<Vec<f64>>,
    /// Comma-separated scales of the truncated-Gaussian null prior.
    #[arg(long, value_delimiter = ',')]
    pub sigma0_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 200)]
    pub n_reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of hypotheses per replication.
    #[arg(long, default_value_t = 5000)]
    pub m: usize,
    /// Proportion of null hypotheses.
    #[arg(long, default_value_t = 0.9)]
    pub pi0: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub procedure: ProcedureArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub null: NullArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HistogramArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub null: NullArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TstatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Comma-separated column names of the first group (numerator mean).
    #[arg(long, value_delimiter = ',', required = true)]
    pub group_a: Vec<String>,
    /// Comma-separated column names of the second group.
    #[arg(long, value_delimiter = ',', required = true)]
    pub group_b: Vec<String>,
    /// Use the pooled-variance statistic instead of Welch's.
    #[arg(long)]
    pub pooled: bool,
}

/// Echoed into every output: tool identity plus the resolved arguments.
#[derive(Serialize)]
struct Config<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    #[serde(flatten)]
    args: &'a T,
}

fn config<'a, T: Serialize>(command: &'static str, args: &'a T) -> Config<'a, T> {
    Config {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        args,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let (output, text) = match &cli.command {
        Command::FitNull(a) => (&a.output, fit_null(a)?),
        Command::Test(a) => (&a.output, test(a)?),
        Command::Simulate(a) => (&a.output, simulate(a)?),
        Command::Histogram(a) => (&a.output, histogram(a)?),
        Command::Tstats(a) => (&a.output, tstats(a)?),
    };
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum NullParams {
    Gaussian {
        mu0: f64,
        mu0_unconstrained: f64,
    },
    SkewNormal {
        sigma0: f64,
        location: f64,
        scale: f64,
        shape: f64,
        at_boundary: bool,
    },
    FiniteMixture {
        grid: Vec<f64>,
        weights: Vec<f64>,
    },
}

fn null_params(model: &NullModel) -> NullParams {
    match &model.fitted {
        FittedNull::Gaussian(g) => NullParams::Gaussian {
            mu0: g.mu0,
            mu0_unconstrained: g.mu0_unconstrained,
        },
        FittedNull::SkewNormal(s) => {
            let p = s.params();
            NullParams::SkewNormal {
                sigma0: s.sigma0,
                location: p.location(),
                scale: p.scale(),
                shape: p.shape(),
                at_boundary: s.at_boundary,
            }
        }
        FittedNull::FiniteMixture(m) => NullParams::FiniteMixture {
            grid: m.grid.clone(),
            weights: m.weights_p.clone(),
        },
    }
}

#[derive(Serialize)]
struct Logliks {
    gaussian: Option<f64>,
    skew_normal: Option<f64>,
    finite_mixture: Option<f64>,
}

impl From<&NullModel> for Logliks {
    fn from(model: &NullModel) -> Self {
        Logliks {
            gaussian: model.logliks.gaussian,
            skew_normal: model.logliks.skew_normal,
            finite_mixture: model.logliks.finite_mixture,
        }
    }
}

#[derive(Serialize)]
struct FitReport<C: Serialize> {
    family: &'static str,
    params: NullParams,
    logliks: Logliks,
    xi: f64,
    n_truncated: usize,
    config: C,
}

fn fit(stats: &Statistics, null: &NullArgs) -> Result<NullModel> {
    Ok(select_null(&stats.sample, &null.select_options())?)
}

pub fn fit_null(args: &FitNullArgs) -> Result<String> {
    let stats = ingest_statistics(&args.input)?;
    let model = fit(&stats, &args.null)?;
    to_json(&FitReport {
        family: model.family().name(),
        params: null_params(&model),
        logliks: Logliks::from(&model),
        xi: model.cut,
        n_truncated: model.n_truncated,
        config: config("fit-null", args),
    })
}

#[derive(Serialize)]
struct MethodRecord {
    method: MethodArg,
    rejections: usize,
    pi0_hat: f64,
    threshold: f64,
}

#[derive(Serialize)]
struct HypothesisRecord {
    id: String,
    z: f64,
    p_std: f64,
    p_eb: f64,
    rejected_by: Vec<MethodArg>,
}

#[derive(Serialize)]
struct TestReport<C: Serialize> {
    family: &'static str,
    xi: f64,
    n_truncated: usize,
    methods: Vec<MethodRecord>,
    hypotheses: Vec<HypothesisRecord>,
    config: C,
}

pub fn test(args: &TestArgs) -> Result<String> {
    let stats = ingest_statistics(&args.input)?;
    let settings = args.procedure.settings(&args.null);
    let model = fit(&stats, &args.null)?;
    let p_std = standard_pvalues(&stats.sample);
    let p_eb = eb_pvalues(&stats.sample, &model);

    let mut results: Vec<(MethodArg, RejectionResult)> = Vec::new();
    for &m in &args.methods {
        let result = match m {
            // Reuse the fitted null rather than refitting inside run_method.
            MethodArg::Proposed => ebnull_core::procedures::storey_bh(
                &p_eb,
                args.procedure.q,
                args.procedure.lambda_storey,
            )?,
            _ => run_method(m.into(), &stats.sample, &p_std, args.procedure.q, &settings)?,
        };
        results.push((m, result));
    }

    let n = stats.sample.len();
    let mut flags = vec![Vec::new(); n];
    for (m, r) in &results {
        for &i in &r.rejected {
            flags[i].push(*m);
        }
    }
    let hypotheses = flags
        .into_iter()
        .enumerate()
        .map(|(i, rejected_by)| HypothesisRecord {
            id: stats.id(i),
            z: stats.sample.values()[i],
            p_std: p_std.values()[i],
            p_eb: p_eb.values()[i],
            rejected_by,
        })
        .collect();
    let methods = results
        .iter()
        .map(|(m, r)| MethodRecord {
            method: *m,
            rejections: r.rejected.len(),
            pi0_hat: r.pi0_hat,
            threshold: r.threshold,
        })
        .collect();
    to_json(&TestReport {
        family: model.family().name(),
        xi: model.cut,
        n_truncated: model.n_truncated,
        methods,
        hypotheses,
        config: config("test", args),
    })
}

const DEFAULT_RHO_GRID: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

pub fn simulate(args: &SimulateArgs) -> Result<String> {
    if args.methods.is_empty() {
        return Err(CliError::Argument(
            "at least one --method is required".into(),
        ));
    }
    let mut points: Vec<(&str, f64, NullPrior)> = Vec::new();
    let rho_grid = match (&args.rho_grid, &args.sigma0_grid) {
        (None, None) => Some(DEFAULT_RHO_GRID.to_vec()),
        (rho, _) => rho.clone(),
    };
    for rho in rho_grid.unwrap_or_default() {
        points.push(("two_point", rho, NullPrior::TwoPoint { rho }));
    }
    for &sigma0 in args.sigma0_grid.iter().flatten() {
        points.push(("trunc_gauss", sigma0, NullPrior::TruncGauss { sigma0 }));
    }
    let methods: Vec<Method> = args.methods.iter().map(|&m| m.into()).collect();
    let settings = args.procedure.settings(&args.null);

    let mut rows = Vec::new();
    for (name, param, prior) in points {
        let scenario = SimScenario {
            m: args.m,
            pi0: args.pi0,
            q: args.procedure.q,
            null_prior: prior,
            n_reps: args.n_reps,
            base_seed: args.seed,
            ..SimScenario::default()
        };
        let summary = run_scenario_parallel(&scenario, &settings, &methods)?;
        if !summary.failures.is_empty() {
            eprintln!(
                "warning: {name} {param}: {} of {} replications failed (first: rep {}: {})",
                summary.failures.len(),
                args.n_reps,
                summary.failures[0].0,
                summary.failures[0].1
            );
        }
        for (arg, s) in args.methods.iter().zip(&summary.methods) {
            rows.push(vec![
                name.to_string(),
                fmt_f64(param),
                method_name(*arg),
                fmt_f64(s.fdr),
                fmt_f64(s.fdr_se),
                fmt_f64(s.tpr),
                fmt_f64(s.tpr_se),
                summary.n_reps.to_string(),
                args.seed.to_string(),
            ]);
        }
    }
    csv_with_config(
        &config("simulate", args),
        &[
            "scenario", "param", "method", "fdr", "fdr_se", "tpr", "tpr_se", "n_reps", "seed",
        ],
        &rows,
    )
}

fn method_name(m: MethodArg) -> String {
    Method::from(m).name().to_string()
}

pub fn histogram(args: &HistogramArgs) -> Result<String> {
    let stats = ingest_statistics(&args.input)?;
    let model = fit(&stats, &args.null)?;
    let p_std = standard_pvalues(&stats.sample);
    let p_eb = eb_pvalues(&stats.sample, &model);
    let h_std = pvalue_histogram(p_std.values(), args.bins)?;
    let h_eb = pvalue_histogram(p_eb.values(), args.bins)?;
    let rows: Vec<Vec<String>> = (0..args.bins)
        .map(|b| {
            vec![
                fmt_f64(h_std.edges[b]),
                fmt_f64(h_std.edges[b + 1]),
                h_std.counts[b].to_string(),
                h_eb.counts[b].to_string(),
            ]
        })
        .collect();
    csv_with_config(
        &config("histogram", args),
        &["bin_lo", "bin_hi", "count_std", "count_eb"],
        &rows,
    )
}

pub fn tstats(args: &TstatsArgs) -> Result<String> {
    let variance = if args.pooled {
        Variance::Pooled
    } else {
        Variance::Welch
    };
    let table = tstats_from_csv(&args.input, &args.group_a, &args.group_b, variance)?;
    if !table.skipped.is_empty() {
        eprintln!(
            "warning: {} rows skipped (fewer than two values in a group or zero variance)",
            table.skipped.len()
        );
    }
    let rows: Vec<Vec<String>> = table
        .ids
        .iter()
        .zip(&table.statistics)
        .map(|(id, &t)| vec![id.clone(), fmt_f64(t)])
        .collect();
    csv_with_config(&config("tstats", args), &["id", "statistic"], &rows)
}
