//! Benchmark sweeps: generate, attack, estimate and score over a grid of
//! outlier fractions, then aggregate per (estimator, n1).
//!
//! Lasso and the Justice Pursuit family are tuned by grid search against the
//! ground-truth ℓ2 error, and RoMP is handed the true `k` and `n1`. Both
//! choices favour the baselines. Every estimator in a sweep sees the same
//! attacked instance for a given (fraction, trial) pair.

mod report;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{emit_report, render_svg, to_csv, write_timings, Metric, ReportFormat, CSV_HEADER};

use crate::corruption::AttackSpec;
use crate::datagen::{assemble_instance, DesignDistribution, InstanceParams, SignalScheme, SignalValues};
use crate::error::{Error, Result};
use crate::estimators::{
    fill_matrix, matching_pursuit_omp, romp, row_discard, top_k_support, CdFit, CdOptions, CdProblem,
};
use crate::model::{norm2, RegressionInstance, SupportSet};
use crate::rng::derive_seed;

/// Log-spaced multipliers of a reference scale (`λ_max` for `λ`, `‖y‖∞` for
/// `γ`), visited from `high` down to `low`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub low: f64,
    pub high: f64,
    pub points: usize,
}

impl Grid {
    /// Default `λ` grid, `[10⁻², 1]·λ_max`. Below that the designs with
    /// `p > n` make the Lasso nearly interpolating and the solves slow, far
    /// from any error-minimizing `λ`.
    pub fn lambda() -> Self {
        Self {
            low: 1e-2,
            high: 1.0,
            points: 7,
        }
    }

    /// Default `γ` grid, `[10⁻³, 1]·‖y‖∞`.
    pub fn gamma() -> Self {
        Self {
            low: 1e-3,
            high: 1.0,
            points: 7,
        }
    }

    pub fn factors(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.high];
        }
        let (a, b) = (self.high.ln(), self.low.ln());
        (0..self.points)
            .map(|i| (a + (b - a) * i as f64 / (self.points - 1) as f64).exp())
            .collect()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if !(self.low > 0.0 && self.high >= self.low && self.high.is_finite()) || self.points == 0 {
            return Err(Error::InvalidParameter(format!(
                "{what} grid needs 0 < low <= high and at least one point"
            )));
        }
        Ok(())
    }
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum EstimatorSpec {
    Romp {},
    Omp {},
    Lasso {
        #[serde(default = "Grid::lambda")]
        lambda: Grid,
    },
    JusticePursuit {
        #[serde(default = "Grid::lambda")]
        lambda: Grid,
        #[serde(default = "Grid::gamma")]
        gamma: Grid,
    },
    JpFill {
        #[serde(default = "Grid::lambda")]
        lambda: Grid,
        #[serde(default = "Grid::gamma")]
        gamma: Grid,
        /// Magnitude written into the clipped entries.
        #[serde(default = "unit")]
        fill_scale: f64,
    },
    JpRow {
        #[serde(default = "Grid::lambda")]
        lambda: Grid,
        #[serde(default = "Grid::gamma")]
        gamma: Grid,
    },
}

impl EstimatorSpec {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorSpec::Romp {} => "romp",
            EstimatorSpec::Omp {} => "omp",
            EstimatorSpec::Lasso { .. } => "lasso",
            EstimatorSpec::JusticePursuit { .. } => "jp",
            EstimatorSpec::JpFill { .. } => "jp_fill",
            EstimatorSpec::JpRow { .. } => "jp_row",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            EstimatorSpec::Romp {} | EstimatorSpec::Omp {} => Ok(()),
            EstimatorSpec::Lasso { lambda } => lambda.validate("lambda"),
            EstimatorSpec::JusticePursuit { lambda, gamma } | EstimatorSpec::JpRow { lambda, gamma } => {
                lambda.validate("lambda")?;
                gamma.validate("gamma")
            }
            EstimatorSpec::JpFill {
                lambda,
                gamma,
                fill_scale,
            } => {
                lambda.validate("lambda")?;
                gamma.validate("gamma")?;
                if !(fill_scale.is_finite() && *fill_scale >= 0.0) {
                    return Err(Error::InvalidParameter(format!("fill scale {fill_scale} must be >= 0")));
                }
                Ok(())
            }
        }
    }
}

fn pm_one() -> SignalValues {
    SignalValues::PmOne
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: usize,
    /// Authentic rows; each fraction `f` adds `round(f·n)` adversarial rows.
    pub n: usize,
    pub k: usize,
    pub sigma_e: f64,
    #[serde(default = "pm_one")]
    pub signal: SignalValues,
    #[serde(default)]
    pub design: DesignDistribution,
    pub attack: AttackSpec,
    pub estimators: Vec<EstimatorSpec>,
    /// Outlier fractions `n1/n`.
    pub fractions: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    fn default_baselines() -> Vec<EstimatorSpec> {
        vec![
            EstimatorSpec::Romp {},
            EstimatorSpec::Lasso {
                lambda: Grid::lambda(),
            },
            EstimatorSpec::JusticePursuit {
                lambda: Grid::lambda(),
                gamma: Grid::gamma(),
            },
            EstimatorSpec::JpFill {
                lambda: Grid::lambda(),
                gamma: Grid::gamma(),
                fill_scale: 1.0,
            },
            EstimatorSpec::JpRow {
                lambda: Grid::lambda(),
                gamma: Grid::gamma(),
            },
        ]
    }

    /// Small default sweep: p=400, n=160, k=10, σ_e=2, feasibility attack.
    pub fn desk() -> Self {
        Self {
            p: 400,
            n: 160,
            k: 10,
            sigma_e: 2.0,
            signal: SignalValues::PmOne,
            design: DesignDistribution::default(),
            attack: AttackSpec::Feasibility {},
            estimators: Self::default_baselines(),
            fractions: vec![0.0, 0.02, 0.04, 0.06, 0.08],
            trials: 20,
            seed: 2024,
            output_dir: None,
        }
    }

    /// Full-size sweep: p=4000, n=1600, otherwise as [`desk`](Self::desk).
    pub fn full() -> Self {
        Self {
            p: 4000,
            n: 1600,
            ..Self::desk()
        }
    }

    pub fn n1_for(&self, fraction: f64) -> usize {
        (fraction * self.n as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n == 0 || self.p == 0 || self.k == 0 || self.k > self.p {
            return bad(format!("need n, p >= 1 and 1 <= k <= p (n={}, p={}, k={})", self.n, self.p, self.k));
        }
        if !(self.sigma_e >= 0.0 && self.sigma_e.is_finite()) {
            return bad(format!("noise level {} must be >= 0", self.sigma_e));
        }
        if self.estimators.is_empty() || self.fractions.is_empty() || self.trials == 0 {
            return bad("estimators, fractions and trials must be non-empty".into());
        }
        for f in &self.fractions {
            if !(0.0..1.0).contains(f) {
                return bad(format!("outlier fraction {f} must lie in [0, 1)"));
            }
        }
        for e in &self.estimators {
            e.validate()?;
        }
        if let SignalValues::Fixed { values } = &self.signal {
            if values.len() != self.k {
                return bad(format!("{} fixed values for sparsity {}", values.len(), self.k));
            }
        }
        match self.attack {
            AttackSpec::Sco { .. } if self.p < 2 * self.k => bad("the sco attack needs p >= 2k".into()),
            AttackSpec::Bruteforce {} if self.signal != SignalValues::Ones || self.k == self.p => {
                bad("the bruteforce attack needs an all-ones signal and k < p".into())
            }
            _ => Ok(()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn instance_params(&self, n1: usize) -> InstanceParams {
        InstanceParams {
            n: self.n,
            n1,
            p: self.p,
            design: self.design,
            signal: SignalScheme {
                values: self.signal.clone(),
                k: self.k,
                support: Default::default(),
            },
            sigma_e: self.sigma_e,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub estimator: String,
    pub n1: usize,
    pub fraction: f64,
    pub trial: usize,
    pub seed: u64,
    /// `None` when the trial failed.
    pub support_recovery: Option<f64>,
    pub relative_l2_error: Option<f64>,
    /// Hyperparameters chosen by the grid search.
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    /// Grid points that hit the sweep cap and were skipped.
    pub unconverged: usize,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Wall time of one trial. Kept out of [`SweepReport`] so that reports are
/// reproducible byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialTiming {
    pub estimator: String,
    pub n1: usize,
    pub trial: usize,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub estimator: String,
    pub n1: usize,
    pub fraction: f64,
    pub completed: usize,
    pub failed: usize,
    pub recovery_mean: f64,
    pub recovery_std: f64,
    pub error_mean: f64,
    pub error_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.failed()).count()
    }

    pub fn aggregate_for(&self, estimator: &str, n1: usize) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.estimator == estimator && a.n1 == n1)
    }
}

pub struct SweepOutcome {
    pub report: SweepReport,
    pub timings: Vec<TrialTiming>,
}

/// `|Λ̂ ∩ Λ*| / |Λ*|`.
pub fn support_recovery(estimate: &SupportSet, truth: &SupportSet) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::InvalidParameter("the true support is empty".into()));
    }
    Ok(estimate.intersection_count(truth) as f64 / truth.len() as f64)
}

/// `‖β̂ − β*‖₂ / ‖β*‖₂`.
pub fn relative_l2_error(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "estimate has {} entries, truth has {}",
            estimate.len(),
            truth.len()
        )));
    }
    let scale = norm2(truth);
    if scale == 0.0 {
        return Err(Error::InvalidParameter("the true signal is zero".into()));
    }
    let diff: Vec<f64> = estimate.iter().zip(truth).map(|(a, b)| a - b).collect();
    Ok(norm2(&diff) / scale)
}

/// Clean instance for `n1` outliers, attacked per the config.
pub fn prepare_instance(config: &ExperimentConfig, n1: usize, seed: u64) -> Result<RegressionInstance> {
    let clean = assemble_instance(&config.instance_params(n1), seed)?;
    config.attack.apply(&clean, seed)
}

struct Estimate {
    beta: Vec<f64>,
    lambda: Option<f64>,
    gamma: Option<f64>,
    unconverged: usize,
}

/// Solve over the `(λ, γ)` grid with warm starts along `λ` and keep the fit
/// with the smallest error against `truth`. Ties keep the earlier grid point.
fn tuned(
    prob: &CdProblem,
    y: &[f64],
    lambda: &Grid,
    gamma: Option<&Grid>,
    truth: &[f64],
) -> Result<Estimate> {
    let opts = CdOptions::default();
    let lambdas: Vec<f64> = lambda.factors().iter().map(|f| f * prob.lambda_max()).collect();
    let y_inf = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gammas: Vec<Option<f64>> = match gamma {
        Some(g) => g.factors().iter().map(|f| Some(f * y_inf)).collect(),
        None => vec![None],
    };
    let mut best: Option<(f64, Estimate)> = None;
    let mut unconverged = 0;
    for &g in &gammas {
        let mut warm: Option<CdFit> = None;
        for &l in &lambdas {
            match prob.solve(l, g, warm.as_ref(), &opts) {
                Ok(fit) => {
                    let err = relative_l2_error(&fit.beta, truth)?;
                    if best.as_ref().is_none_or(|(e, _)| err < *e) {
                        best = Some((
                            err,
                            Estimate {
                                beta: fit.beta.clone(),
                                lambda: Some(l),
                                gamma: g,
                                unconverged: 0,
                            },
                        ));
                    }
                    warm = Some(fit);
                }
                Err(Error::NotConverged { .. }) => unconverged += 1,
                Err(e) => return Err(e),
            }
        }
    }
    let (_, mut est) = best.ok_or_else(|| {
        Error::InvalidParameter(format!("no grid point converged ({unconverged} attempts)"))
    })?;
    est.unconverged = unconverged;
    Ok(est)
}

fn estimate(spec: &EstimatorSpec, inst: &RegressionInstance, k: usize, n1: usize) -> Result<Estimate> {
    let truth = inst.truth.dense();
    let plain = |beta: Vec<f64>| Estimate {
        beta,
        lambda: None,
        gamma: None,
        unconverged: 0,
    };
    match spec {
        EstimatorSpec::Romp {} => Ok(plain(romp(&inst.x, &inst.y, k, n1)?.beta_hat)),
        EstimatorSpec::Omp {} => Ok(plain(matching_pursuit_omp(&inst.x, &inst.y, k)?.beta_hat)),
        EstimatorSpec::Lasso { lambda } => {
            tuned(&CdProblem::new(&inst.x, &inst.y)?, &inst.y, lambda, None, &truth)
        }
        EstimatorSpec::JusticePursuit { lambda, gamma } => tuned(
            &CdProblem::new(&inst.x, &inst.y)?,
            &inst.y,
            lambda,
            Some(gamma),
            &truth,
        ),
        EstimatorSpec::JpFill {
            lambda,
            gamma,
            fill_scale,
        } => {
            let x = fill_matrix(&inst.x, n1, *fill_scale);
            tuned(&CdProblem::new(&x, &inst.y)?, &inst.y, lambda, Some(gamma), &truth)
        }
        EstimatorSpec::JpRow { lambda, gamma } => {
            let kept = row_discard(&inst.x, n1)?;
            let x = inst.x.select_rows(&kept);
            let y: Vec<f64> = kept.iter().map(|&i| inst.y[i]).collect();
            tuned(&CdProblem::new(&x, &y)?, &y, lambda, Some(gamma), &truth)
        }
    }
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("panic: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("panic: {s}")
    } else {
        "panic".into()
    }
}

fn guarded<T>(f: impl FnOnce() -> Result<T>) -> std::result::Result<T, String> {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => Ok(v),
        Ok(Err(e)) => Err(e.to_string()),
        Err(payload) => Err(panic_message(payload)),
    }
}

/// Score one estimator on a prepared instance. Errors and panics become a
/// failed record.
pub fn score_estimator(
    config: &ExperimentConfig,
    spec: &EstimatorSpec,
    inst: &RegressionInstance,
    fraction: f64,
    trial: usize,
    seed: u64,
) -> (TrialRecord, TrialTiming) {
    let n1 = inst.n_outliers();
    let start = Instant::now();
    let outcome = guarded(|| {
        let est = estimate(spec, inst, config.k, n1)?;
        if est.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter("the estimate is not finite".into()));
        }
        let support = top_k_support(&est.beta, config.k)?;
        let recovery = support_recovery(&support, inst.truth.support())?;
        let error = relative_l2_error(&est.beta, &inst.truth.dense())?;
        Ok((est, recovery, error))
    });
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut record = TrialRecord {
        estimator: spec.label().into(),
        n1,
        fraction,
        trial,
        seed,
        support_recovery: None,
        relative_l2_error: None,
        lambda: None,
        gamma: None,
        unconverged: 0,
        error: None,
    };
    match outcome {
        Ok((est, recovery, error)) => {
            record.support_recovery = Some(recovery);
            record.relative_l2_error = Some(error);
            record.lambda = est.lambda;
            record.gamma = est.gamma;
            record.unconverged = est.unconverged;
        }
        Err(msg) => record.error = Some(msg),
    }
    let timing = TrialTiming {
        estimator: record.estimator.clone(),
        n1,
        trial,
        wall_time_ms,
    };
    (record, timing)
}

/// Seed of trial `trial` at fraction index `point`.
pub fn trial_seed(config: &ExperimentConfig, point: usize, trial: usize) -> u64 {
    derive_seed(config.seed, &[point as u64, trial as u64])
}

/// Generate, attack and score a single `(estimator, n1)` point.
pub fn run_trial(config: &ExperimentConfig, spec: &EstimatorSpec, fraction: f64, trial: usize, seed: u64) -> TrialRecord {
    let n1 = config.n1_for(fraction);
    match guarded(|| prepare_instance(config, n1, seed)) {
        Ok(inst) => score_estimator(config, spec, &inst, fraction, trial, seed).0,
        Err(msg) => failed_record(spec, n1, fraction, trial, seed, msg),
    }
}

fn failed_record(spec: &EstimatorSpec, n1: usize, fraction: f64, trial: usize, seed: u64, msg: String) -> TrialRecord {
    TrialRecord {
        estimator: spec.label().into(),
        n1,
        fraction,
        trial,
        seed,
        support_recovery: None,
        relative_l2_error: None,
        lambda: None,
        gamma: None,
        unconverged: 0,
        error: Some(msg),
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let m = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (m, 0.0);
    }
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    (m, var.sqrt())
}

/// Mean and sample standard deviation of both metrics per (estimator, n1),
/// over completed trials, in order of first appearance.
pub fn aggregate(records: &[TrialRecord]) -> Vec<Aggregate> {
    let mut keys: Vec<(&str, usize, f64)> = Vec::new();
    for r in records {
        if !keys.iter().any(|k| k.0 == r.estimator && k.1 == r.n1) {
            keys.push((&r.estimator, r.n1, r.fraction));
        }
    }
    keys.into_iter()
        .map(|(est, n1, fraction)| {
            let group: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.estimator == est && r.n1 == n1)
                .collect();
            let rec: Vec<f64> = group.iter().filter_map(|r| r.support_recovery).collect();
            let err: Vec<f64> = group.iter().filter_map(|r| r.relative_l2_error).collect();
            let (recovery_mean, recovery_std) = mean_std(&rec);
            let (error_mean, error_std) = mean_std(&err);
            Aggregate {
                estimator: est.to_string(),
                n1,
                fraction,
                completed: rec.len(),
                failed: group.len() - rec.len(),
                recovery_mean,
                recovery_std,
                error_mean,
                error_std,
            }
        })
        .collect()
}

/// Run every (fraction, trial) pair in parallel; each pair builds one attacked
/// instance and scores every estimator on it. Records are ordered by
/// estimator (config order), then fraction, then trial.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let units: Vec<(usize, usize)> = (0..config.fractions.len())
        .flat_map(|g| (0..config.trials).map(move |t| (g, t)))
        .collect();
    let results: Vec<Vec<(usize, TrialRecord, TrialTiming)>> = units
        .par_iter()
        .map(|&(g, t)| {
            let fraction = config.fractions[g];
            let n1 = config.n1_for(fraction);
            let seed = trial_seed(config, g, t);
            let inst = guarded(|| prepare_instance(config, n1, seed));
            config
                .estimators
                .iter()
                .enumerate()
                .map(|(e, spec)| match &inst {
                    Ok(inst) => {
                        let (r, tm) = score_estimator(config, spec, inst, fraction, t, seed);
                        (e, r, tm)
                    }
                    Err(msg) => {
                        let r = failed_record(spec, n1, fraction, t, seed, msg.clone());
                        let tm = TrialTiming {
                            estimator: r.estimator.clone(),
                            n1,
                            trial: t,
                            wall_time_ms: 0.0,
                        };
                        (e, r, tm)
                    }
                })
                .collect()
        })
        .collect();

    let mut flat: Vec<(usize, usize, usize, TrialRecord, TrialTiming)> = Vec::new();
    for (&(g, t), unit) in units.iter().zip(results) {
        for (e, r, tm) in unit {
            flat.push((e, g, t, r, tm));
        }
    }
    flat.sort_by_key(|x| (x.0, x.1, x.2));
    let (records, timings): (Vec<TrialRecord>, Vec<TrialTiming>) =
        flat.into_iter().map(|x| (x.3, x.4)).unzip();
    let aggregates = aggregate(&records);
    Ok(SweepOutcome {
        report: SweepReport {
            config: config.clone(),
            records,
            aggregates,
        },
        timings,
    })
}
