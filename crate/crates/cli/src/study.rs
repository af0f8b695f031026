//! Seeded Monte Carlo comparison of the EM, ML and Chen–Lio EM estimators.
//!
//! Every replication draws from its own ChaCha8 stream, selected by
//! `(seed, plan index, replication)`, and all three estimators are fitted
//! on the same simulated dataset. Results are gathered in replication
//! order, so the output does not depend on the number of worker threads.

use std::collections::HashSet;
use std::fmt::Write as _;

use gecens::{
    fit_em, fit_em_chen, fit_ml, generate, EmConfig, FitResult, GeParams, InspectionSchedule,
    IntervalDataset, Method, RemovalPlan,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Estimators in the order they are reported.
pub const ESTIMATORS: [Method; 3] = [Method::Em, Method::Ml, Method::EmChen];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedPlan {
    pub name: String,
    pub percentages: RemovalPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub true_params: GeParams,
    pub n: u64,
    pub schedule: InspectionSchedule,
    pub plans: Vec<NamedPlan>,
    pub replications: usize,
    #[serde(default)]
    pub em_config: EmConfig,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("invalid study configuration: {0}")]
    Config(String),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), StudyError> {
        let bad = |m: &str| Err(StudyError::Config(m.to_string()));
        if self.replications == 0 {
            return bad("replications must be at least 1");
        }
        if self.n == 0 {
            return bad("sample size must be positive");
        }
        if self.plans.is_empty() {
            return bad("at least one removal plan is required");
        }
        let mut names = HashSet::new();
        for plan in &self.plans {
            if !names.insert(plan.name.as_str()) {
                return Err(StudyError::Config(format!(
                    "duplicate plan name `{}`",
                    plan.name
                )));
            }
            if plan.percentages.len() != self.schedule.len() {
                return Err(StudyError::Config(format!(
                    "plan `{}` has {} entries, schedule has {}",
                    plan.name,
                    plan.percentages.len(),
                    self.schedule.len()
                )));
            }
        }
        self.em_config
            .validate()
            .map_err(|e| StudyError::Config(e.to_string()))
    }
}

/// The published design: GE(1.5, 0.06), n = 112, nine inspections up to
/// 60.5, four removal plans, 1000 replications, start (1, 0.5), tol 1e-6.
pub fn paper_config(seed: u64) -> StudyConfig {
    let plan = |name: &str, p: [f64; 9]| NamedPlan {
        name: name.to_string(),
        percentages: RemovalPlan::new(p.to_vec()).expect("valid plan"),
    };
    StudyConfig {
        true_params: GeParams::new(1.5, 0.06).expect("valid parameters"),
        n: 112,
        schedule: InspectionSchedule::new(vec![
            5.5, 10.5, 15.5, 20.5, 25.5, 30.5, 40.5, 50.5, 60.5,
        ])
        .expect("valid schedule"),
        plans: vec![
            plan("p1", [0.25, 0.25, 0.25, 0.25, 0.5, 0.5, 0.5, 0.5, 1.0]),
            plan("p2", [0.5, 0.5, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25, 1.0]),
            plan("p3", [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            plan("p4", [0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        ],
        replications: 1000,
        em_config: EmConfig::default(),
        seed,
    }
}

/// One estimator's outcome on one replication. A fit that errored has
/// NaN estimates and `converged = false`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub alpha: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// α after the first update, if any update happened.
    pub first_alpha: Option<f64>,
}

impl Estimate {
    fn from_fit(fit: gecens::Result<FitResult>) -> Self {
        match fit {
            Ok(fit) => Self {
                alpha: fit.params.alpha(),
                lambda: fit.params.lambda(),
                iterations: fit.iterations,
                converged: fit.converged,
                first_alpha: fit.trace.get(1).map(|t| t.0),
            },
            Err(_) => Self {
                alpha: f64::NAN,
                lambda: f64::NAN,
                iterations: 0,
                converged: false,
                first_alpha: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub index: usize,
    pub data: IntervalDataset,
    /// Indexed like [`ESTIMATORS`].
    pub estimates: [Estimate; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanRun {
    pub name: String,
    pub replications: Vec<Replication>,
}

/// Bias and MSE of one estimator under one plan, over converged fits.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryCell {
    pub scenario: String,
    pub estimator: Method,
    pub bias_alpha: f64,
    pub mse_alpha: f64,
    pub var_alpha: f64,
    /// Monte Carlo standard error of `bias_alpha`.
    pub se_bias_alpha: f64,
    pub bias_lambda: f64,
    pub mse_lambda: f64,
    pub var_lambda: f64,
    pub se_bias_lambda: f64,
    pub mean_iterations: f64,
    pub median_iterations: f64,
    pub convergence_rate: f64,
    pub used: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudySummary {
    pub cells: Vec<SummaryCell>,
}

impl StudySummary {
    pub fn cell(&self, scenario: &str, estimator: Method) -> Option<&SummaryCell> {
        self.cells
            .iter()
            .find(|c| c.scenario == scenario && c.estimator == estimator)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutput {
    pub summary: StudySummary,
    pub runs: Vec<PlanRun>,
}

/// Random stream for replication `k` of plan `plan`.
pub fn replication_rng(seed: u64, plan: usize, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((plan as u64) << 32) | k as u64);
    rng
}

fn replicate(config: &StudyConfig, plan_index: usize, k: usize) -> Replication {
    let mut rng = replication_rng(config.seed, plan_index, k);
    let plan = &config.plans[plan_index].percentages;
    let data = generate(
        config.n,
        &config.true_params,
        &config.schedule,
        plan,
        &mut rng,
    )
    .expect("validated configuration");
    let s = &config.schedule;
    let c = &config.em_config;
    let estimates = [
        Estimate::from_fit(fit_em(&data, s, c)),
        Estimate::from_fit(fit_ml(&data, s, c)),
        Estimate::from_fit(fit_em_chen(&data, s, c)),
    ];
    Replication {
        index: k,
        data,
        estimates,
    }
}

/// Run every plan and replication, on `threads` workers (all cores if `None`).
pub fn run_study(config: &StudyConfig, threads: Option<usize>) -> Result<StudyOutput, StudyError> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    let reps = config.replications;
    let units: Vec<(usize, usize)> = (0..config.plans.len())
        .flat_map(|p| (0..reps).map(move |k| (p, k)))
        .collect();
    let results: Vec<Replication> = pool.install(|| {
        units
            .par_iter()
            .map(|&(p, k)| replicate(config, p, k))
            .collect()
    });

    let mut results = results.into_iter();
    let runs: Vec<PlanRun> = config
        .plans
        .iter()
        .map(|plan| PlanRun {
            name: plan.name.clone(),
            replications: results.by_ref().take(reps).collect(),
        })
        .collect();
    let summary = summarize(&runs, &config.true_params);
    Ok(StudyOutput { summary, runs })
}

struct Moments {
    bias: f64,
    mse: f64,
    var: f64,
    se: f64,
}

fn moments(values: &[f64], truth: f64) -> Moments {
    let n = values.len() as f64;
    if values.is_empty() {
        return Moments {
            bias: f64::NAN,
            mse: f64::NAN,
            var: f64::NAN,
            se: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let mse = values
        .iter()
        .map(|v| (v - truth) * (v - truth))
        .sum::<f64>()
        / n;
    let se = if values.len() > 1 {
        (var * n / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Moments {
        bias: mean - truth,
        mse,
        var,
        se,
    }
}

/// Aggregate per (plan, estimator), in replication order.
pub fn summarize(runs: &[PlanRun], truth: &GeParams) -> StudySummary {
    let mut cells = Vec::new();
    for run in runs {
        for (e, &method) in ESTIMATORS.iter().enumerate() {
            let all: Vec<&Estimate> = run.replications.iter().map(|r| &r.estimates[e]).collect();
            let ok: Vec<&Estimate> = all.iter().copied().filter(|x| x.converged).collect();
            let alphas: Vec<f64> = ok.iter().map(|x| x.alpha).collect();
            let lambdas: Vec<f64> = ok.iter().map(|x| x.lambda).collect();
            let a = moments(&alphas, truth.alpha());
            let l = moments(&lambdas, truth.lambda());
            let mut iters: Vec<usize> = ok.iter().map(|x| x.iterations).collect();
            iters.sort_unstable();
            let median_iterations = match iters.len() {
                0 => f64::NAN,
                n if n % 2 == 1 => iters[n / 2] as f64,
                n => 0.5 * (iters[n / 2 - 1] + iters[n / 2]) as f64,
            };
            let mean_iterations = if iters.is_empty() {
                f64::NAN
            } else {
                iters.iter().sum::<usize>() as f64 / iters.len() as f64
            };
            cells.push(SummaryCell {
                scenario: run.name.clone(),
                estimator: method,
                bias_alpha: a.bias,
                mse_alpha: a.mse,
                var_alpha: a.var,
                se_bias_alpha: a.se,
                bias_lambda: l.bias,
                mse_lambda: l.mse,
                var_lambda: l.var,
                se_bias_lambda: l.se,
                mean_iterations,
                median_iterations,
                convergence_rate: ok.len() as f64 / all.len().max(1) as f64,
                used: ok.len(),
                excluded: all.len() - ok.len(),
            });
        }
    }
    StudySummary { cells }
}

pub const SUMMARY_HEADER: &str = "scenario,estimator,bias_alpha,mse_alpha,bias_lambda,mse_lambda,\
se_bias_alpha,se_bias_lambda,mean_iterations,median_iterations,convergence_rate,used,excluded";

pub fn summary_csv(summary: &StudySummary) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for c in &summary.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.scenario,
            c.estimator,
            c.bias_alpha,
            c.mse_alpha,
            c.bias_lambda,
            c.mse_lambda,
            c.se_bias_alpha,
            c.se_bias_lambda,
            c.mean_iterations,
            c.median_iterations,
            c.convergence_rate,
            c.used,
            c.excluded
        );
    }
    out
}

/// `replication,alpha_hat,lambda_hat,iterations,converged` for one estimator.
pub fn trace_csv(run: &PlanRun, estimator: Method) -> String {
    let e = ESTIMATORS
        .iter()
        .position(|&m| m == estimator)
        .expect("known estimator");
    let mut out = String::from("replication,alpha_hat,lambda_hat,iterations,converged\n");
    for r in &run.replications {
        let x = &r.estimates[e];
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.index + 1,
            x.alpha,
            x.lambda,
            x.iterations,
            x.converged
        );
    }
    out
}

/// File name of a trace CSV, e.g. `trace_p1_em-chen.csv`.
pub fn trace_file_name(plan: &str, estimator: Method) -> String {
    format!("trace_{plan}_{estimator}.csv")
}

/// Write `summary.csv` and one trace file per (plan, estimator).
pub fn write_outputs(
    output: &StudyOutput,
    dir: &std::path::Path,
) -> Result<Vec<std::path::PathBuf>, crate::io::IoError> {
    let mut written = Vec::new();
    let path = dir.join("summary.csv");
    crate::io::write_atomic(&path, summary_csv(&output.summary).as_bytes())?;
    written.push(path);
    for run in &output.runs {
        for &m in &ESTIMATORS {
            let path = dir.join(trace_file_name(&run.name, m));
            crate::io::write_atomic(&path, trace_csv(run, m).as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}
