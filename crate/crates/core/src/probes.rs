//! Monte Carlo checks of the probabilistic facts behind RoMP's guarantees and
//! of the construction that defeats exhaustive search.
//!
//! Absolute constants that the theory leaves unspecified are fitted from the
//! simulations (as empirical quantiles or worst-case ratios) and reported with
//! percentile-bootstrap intervals over trials. Trials run in parallel, and
//! each draws from its own seed derived from the probe seed and the trial
//! index, so a report never depends on scheduling.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corruption::{attack_bruteforce, corrupt_distributed, designated_column};
use crate::datagen::{assemble_instance, InstanceParams, SignalScheme};
use crate::error::{Error, Result};
use crate::estimators::romp_scores;
use crate::model::{least_squares, submatrix};
use crate::rng::{derive_seed, stream, Purpose};

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Largest acceptable value of the fitted concentration constants `c₁, c₂`.
pub const CONCENTRATION_CAP: f64 = 10.0;

/// Largest acceptable constant in front of the deviation bound for `h(j)`.
pub const DEVIATION_CAP: f64 = 20.0;

/// A fitted constant with a 95% percentile-bootstrap interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fitted {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe: String,
    pub trials: usize,
    pub parameters: BTreeMap<String, f64>,
    pub statistics: BTreeMap<String, f64>,
    pub bounds: BTreeMap<String, f64>,
    /// Per-grid-point values for probes that sweep a parameter.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub series: BTreeMap<String, Vec<f64>>,
    pub violations: usize,
    pub violation_rate: f64,
    pub fitted: BTreeMap<String, Fitted>,
}

impl ProbeReport {
    fn new(probe: &str, trials: usize, violations: usize) -> Self {
        Self {
            probe: probe.to_string(),
            trials,
            parameters: BTreeMap::new(),
            statistics: BTreeMap::new(),
            bounds: BTreeMap::new(),
            series: BTreeMap::new(),
            violations,
            violation_rate: violations as f64 / trials as f64,
            fitted: BTreeMap::new(),
        }
    }

    fn param(mut self, name: &str, v: f64) -> Self {
        self.parameters.insert(name.into(), v);
        self
    }

    fn stat(&mut self, name: &str, v: f64) {
        self.statistics.insert(name.into(), v);
    }

    fn bound(&mut self, name: &str, v: f64) {
        self.bounds.insert(name.into(), v);
    }

    pub fn fitted_value(&self, name: &str) -> Option<f64> {
        self.fitted.get(name).map(|f| f.value)
    }
}

/// Empirical `q`-quantile: the `⌈q·len⌉`-th smallest value.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut v = values.to_vec();
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    *v.select_nth_unstable_by(idx, f64::total_cmp).1
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn std_error(v: &[f64]) -> f64 {
    std_dev(v) / (v.len() as f64).sqrt()
}

/// Evaluate `stat` on the data and on [`BOOTSTRAP_RESAMPLES`] resamples, each
/// group resampled with replacement independently.
fn fit(groups: &[Vec<f64>], seed: u64, stat: impl Fn(&[Vec<f64>]) -> f64 + Sync) -> Fitted {
    let value = stat(groups);
    let mut boots: Vec<f64> = (0..BOOTSTRAP_RESAMPLES as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(derive_seed(seed, &[r]), Purpose::Bootstrap);
            let resampled: Vec<Vec<f64>> = groups
                .iter()
                .map(|g| (0..g.len()).map(|_| g[rng.random_range(0..g.len())]).collect())
                .collect();
            stat(&resampled)
        })
        .collect();
    boots.sort_unstable_by(f64::total_cmp);
    Fitted {
        value,
        ci_low: quantile(&boots, 0.025),
        ci_high: quantile(&boots, 0.975),
    }
}

fn run_trials<T: Send>(seed: u64, trials: usize, f: impl Fn(u64) -> T + Sync) -> Vec<T> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| f(derive_seed(seed, &[t])))
        .collect()
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is needed".into()));
    }
    Ok(())
}

fn check_log_p(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    Ok(p.ln())
}

/// Maximum of `m` independent `N(0, σ²)` magnitudes against the
/// high-probability bound `4σ√(log m + log p)`, which should fail with
/// probability at most `2p⁻²`.
pub fn probe_max_subgaussian(m: usize, p: f64, sigma: f64, trials: usize, seed: u64) -> Result<ProbeReport> {
    check_trials(trials)?;
    let log_p = check_log_p(p)?;
    if m == 0 || !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("need m >= 1 and sigma >= 0 (m={m}, sigma={sigma})")));
    }
    let scale = ((m as f64).ln() + log_p).sqrt();
    let threshold = 4.0 * sigma * scale;
    let maxima = run_trials(seed, trials, |s| {
        let mut rng = stream(s, Purpose::Probe);
        (0..m)
            .map(|_| (sigma * rng.sample::<f64, _>(StandardNormal)).abs())
            .fold(0.0, f64::max)
    });
    let violations = maxima.iter().filter(|&&v| v > threshold).count();
    let nominal = 2.0 * p.powi(-2);
    let nominal_se = (nominal * (1.0 - nominal) / trials as f64).sqrt();
    let rate = violations as f64 / trials as f64;

    let mut r = ProbeReport::new("max_subgaussian", trials, violations)
        .param("m", m as f64)
        .param("p", p)
        .param("sigma", sigma);
    r.stat("mean_max", mean(&maxima));
    r.stat("sd_max", std_dev(&maxima));
    r.stat("violation_rate_se", (rate * (1.0 - rate) / trials as f64).sqrt());
    r.bound("threshold", threshold);
    r.bound("nominal_rate", nominal);
    r.bound("allowed_rate", nominal + 3.0 * nominal_se);
    let ratios: Vec<f64> = if sigma > 0.0 && scale > 0.0 {
        maxima.iter().map(|v| v / (sigma * scale)).collect()
    } else {
        vec![0.0; trials]
    };
    let level = 1.0 - p.powi(-2);
    r.fitted.insert(
        "constant".into(),
        fit(&[ratios], seed, |g| quantile(&g[0], level)),
    );
    Ok(r)
}

/// `|ΣY_i² − 1|` and `|ΣY_i Z_i|` for independent `Y, Z` with i.i.d.
/// `N(0, 1/n)` entries, in units of `√(log p / n)`. The constants `c₁, c₂`
/// are fitted as the `1 − p⁻²` empirical quantiles of those ratios.
pub fn probe_concentration(n: usize, p: f64, trials: usize, seed: u64) -> Result<ProbeReport> {
    check_trials(trials)?;
    let log_p = check_log_p(p)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let sd = 1.0 / (n as f64).sqrt();
    let unit = (log_p / n as f64).sqrt();
    let sums: Vec<(f64, f64)> = run_trials(seed, trials, |s| {
        let mut rng = stream(s, Purpose::Probe);
        let (mut sq, mut cross) = (0.0, 0.0);
        for _ in 0..n {
            let y = sd * rng.sample::<f64, _>(StandardNormal);
            let z = sd * rng.sample::<f64, _>(StandardNormal);
            sq += y * y;
            cross += y * z;
        }
        (sq, cross)
    });
    let squares: Vec<f64> = sums.iter().map(|s| s.0).collect();
    let crosses: Vec<f64> = sums.iter().map(|s| s.1).collect();
    let r1: Vec<f64> = squares.iter().map(|s| (s - 1.0).abs() / unit).collect();
    let r2: Vec<f64> = crosses.iter().map(|c| c.abs() / unit).collect();
    let violations = r1
        .iter()
        .zip(&r2)
        .filter(|(a, b)| a.max(**b) > CONCENTRATION_CAP)
        .count();

    let mut r = ProbeReport::new("concentration", trials, violations)
        .param("n", n as f64)
        .param("p", p);
    r.stat("mean_sum_squares", mean(&squares));
    r.stat("se_sum_squares", std_error(&squares));
    r.stat("mean_cross", mean(&crosses));
    r.stat("se_cross", std_error(&crosses));
    r.stat("median_ratio_squares", quantile(&r1, 0.5));
    r.stat("median_ratio_cross", quantile(&r2, 0.5));
    r.bound("constant_cap", CONCENTRATION_CAP);
    let level = 1.0 - p.powi(-2);
    r.fitted.insert("c1".into(), fit(&[r1], seed, |g| quantile(&g[0], level)));
    r.fitted.insert(
        "c2".into(),
        fit(&[r2], derive_seed(seed, &[1]), |g| quantile(&g[0], level)),
    );
    Ok(r)
}

/// The three-term deviation bound for `|h(j) − β*_j|` with `n1` corrupted
/// cells per column, without its unspecified constant.
pub fn deviation_bound(beta_max: f64, beta_norm_sq: f64, sigma_e: f64, n: usize, p: usize, n1: usize) -> f64 {
    let (n, log_p) = (n as f64, (p as f64).ln());
    let energy = beta_norm_sq + sigma_e * sigma_e;
    beta_max * (2.0 * log_p / n).sqrt()
        + (energy * log_p / n).sqrt()
        + n1 as f64 * log_p / n * energy.sqrt()
}

/// Least-squares line through `(x_i, y_i)`; slope 0 when the `x_i` coincide.
fn affine_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return (my, 0.0);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Worst-case deviation `max_j |h(j) − β*_j|` of the trimmed scores under
/// the distributed adversary, for each budget in `n1_grid`.
///
/// Fits an affine model of deviation against `n1` and the single constant
/// `C = max over grid points of (worst deviation) / bound`.
pub fn probe_h_deviation(
    p: usize,
    n: usize,
    k: usize,
    sigma_e: f64,
    n1_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ProbeReport> {
    check_trials(trials)?;
    if n1_grid.is_empty() {
        return Err(Error::InvalidParameter("the n1 grid is empty".into()));
    }
    if p < 2 {
        return Err(Error::InvalidParameter("p must be at least 2".into()));
    }
    let mut per_point: Vec<Vec<f64>> = Vec::with_capacity(n1_grid.len());
    for (g, &n1) in n1_grid.iter().enumerate() {
        let params = InstanceParams {
            n,
            n1,
            p,
            design: Default::default(),
            signal: SignalScheme::pm_one(k),
            sigma_e,
        };
        let devs: Result<Vec<f64>> = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let s = derive_seed(seed, &[g as u64, t]);
                let inst = corrupt_distributed(&assemble_instance(&params, s)?, n1, s)?;
                let h = romp_scores(&inst.x, &inst.y, n1)?;
                let beta = inst.truth.dense();
                Ok(h.iter().zip(&beta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            })
            .collect();
        per_point.push(devs?);
    }

    // ±1 signal: ‖β*‖² = k and max |β*_j| = 1.
    let beta_max = if k > 0 { 1.0 } else { 0.0 };
    let bounds: Vec<f64> = n1_grid
        .iter()
        .map(|&n1| deviation_bound(beta_max, k as f64, sigma_e, n, p, n1))
        .collect();
    let violations: usize = per_point
        .iter()
        .zip(&bounds)
        .map(|(d, &b)| d.iter().filter(|&&v| v > DEVIATION_CAP * b).count())
        .sum();
    let grid: Vec<f64> = n1_grid.iter().map(|&v| v as f64).collect();

    let slope_of = |groups: &[Vec<f64>]| {
        let (xs, ys): (Vec<f64>, Vec<f64>) = groups
            .iter()
            .zip(&grid)
            .flat_map(|(d, &x)| d.iter().map(move |&v| (x, v)))
            .unzip();
        affine_fit(&xs, &ys)
    };
    let constant_of = |groups: &[Vec<f64>]| {
        groups
            .iter()
            .zip(&bounds)
            .filter(|(_, &b)| b > 0.0)
            .map(|(d, &b)| d.iter().copied().fold(0.0, f64::max) / b)
            .fold(0.0, f64::max)
    };

    let mut r = ProbeReport::new("h_deviation", trials * n1_grid.len(), violations)
        .param("p", p as f64)
        .param("n", n as f64)
        .param("k", k as f64)
        .param("sigma_e", sigma_e)
        .param("trials_per_point", trials as f64);
    let (intercept, slope) = slope_of(&per_point);
    r.stat("intercept", intercept);
    r.stat("slope", slope);
    if let Some(g0) = n1_grid.iter().position(|&v| v == 0) {
        let clean = mean(&per_point[g0]);
        r.stat("clean_mean_deviation", clean);
        if clean > 0.0 {
            r.stat("intercept_ratio", intercept / clean);
        }
    }
    r.bound("constant_cap", DEVIATION_CAP);
    r.series.insert("n1".into(), grid.clone());
    r.series.insert("mean_deviation".into(), per_point.iter().map(|d| mean(d)).collect());
    r.series.insert(
        "max_deviation".into(),
        per_point.iter().map(|d| d.iter().copied().fold(0.0, f64::max)).collect(),
    );
    r.series.insert("bound".into(), bounds.clone());
    r.fitted.insert("slope".into(), fit(&per_point, seed, |g| slope_of(g).1));
    r.fitted.insert("constant".into(), fit(&per_point, derive_seed(seed, &[1]), constant_of));
    Ok(r)
}

/// Objectives in the construction that makes exhaustive search pick a wrong
/// support. The signal is all ones with `σ_e² = k`, and the exhaustive-search
/// attack fills the `n1` outlier rows. Per trial:
///
/// * (a) the alternative fit `‖e + X₁ − X_d‖²` over the `n − n1` authentic
///   rows it keeps, where `X₁` is the first true column and `X_d` the
///   attack's designated column;
/// * (b) the best fit on the true support using only authentic rows;
/// * (c) the cost any true-support fit pays on a single outlier row.
///
/// A violation is a trial where (a) is not strictly below both (b) and (c).
pub fn probe_bruteforce_failure(
    p: usize,
    k: usize,
    n: usize,
    n1: usize,
    trials: usize,
    seed: u64,
) -> Result<ProbeReport> {
    check_trials(trials)?;
    if k == 0 || p <= k {
        return Err(Error::InvalidParameter(format!("need 1 <= k < p (k={k}, p={p})")));
    }
    if n1 == 0 || n1 > n || (k + 1) * n1 < 3 * n {
        return Err(Error::InvalidParameter(format!(
            "the construction needs 3n/(k+1) <= n1 <= n (n={n}, n1={n1}, k={k})"
        )));
    }
    let sigma_sq = k as f64;
    let params = InstanceParams {
        n,
        n1,
        p,
        design: Default::default(),
        signal: SignalScheme::ones(k),
        sigma_e: sigma_sq.sqrt(),
    };
    let outcomes: Result<Vec<(f64, f64, f64)>> = run_trials(seed, trials, |s| {
        let clean = assemble_instance(&params, s)?;
        let inst = attack_bruteforce(&clean)?;
        let support = inst.truth.support();
        let first = support.as_slice()[0];
        let designated = designated_column(&inst.truth).expect("p > k leaves a free column");
        let fit = |i: usize| support.iter().map(|j| inst.x.get(i, j)).sum::<f64>();

        let authentic = &inst.authentic_rows;
        let alternative: f64 = authentic[n1..]
            .iter()
            .map(|&i| {
                let e = inst.y[i] - fit(i);
                (e + inst.x.get(i, first) - inst.x.get(i, designated)).powi(2)
            })
            .sum();
        let xa = submatrix(&inst.x, authentic, support)?;
        let ya: Vec<f64> = authentic.iter().map(|&i| inst.y[i]).collect();
        let theta = least_squares(&xa, &ya)?;
        let pred = xa.matvec(&theta);
        let correct_clean: f64 = ya.iter().zip(&pred).map(|(a, b)| (a - b).powi(2)).sum();
        let correct_outlier = inst
            .outlier_rows()
            .iter()
            .map(|&i| inst.y[i] * inst.y[i])
            .fold(f64::INFINITY, f64::min);
        Ok((alternative, correct_clean, correct_outlier))
    })
    .into_iter()
    .collect();
    let outcomes = outcomes?;

    let alt: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let clean: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
    let violations = outcomes.iter().filter(|(a, b, c)| !(a < &b.min(*c))).count();
    let shrink = 1.0 - n1 as f64 / n as f64;
    let expected = shrink * (sigma_sq + 2.0);
    let kf = k as f64;

    let mut r = ProbeReport::new("bruteforce_failure", trials, violations)
        .param("p", p as f64)
        .param("k", kf)
        .param("n", n as f64)
        .param("n1", n1 as f64)
        .param("sigma_e_sq", sigma_sq);
    r.stat("mean_alternative", mean(&alt));
    r.stat("sd_alternative", std_dev(&alt));
    r.stat("mean_correct_clean", mean(&clean));
    r.stat(
        "min_correct_outlier",
        outcomes.iter().map(|o| o.2).fold(f64::INFINITY, f64::min),
    );
    r.bound("expected_alternative", expected);
    r.bound("alternative_upper", (1.0 + 1.0 / kf) * expected);
    r.bound("correct_lower_outlier", kf);
    r.bound("correct_lower_clean", (1.0 - 1.0 / kf) * sigma_sq);
    r.fitted.insert(
        "alternative_mean_ratio".into(),
        fit(&[alt], seed, |g| mean(&g[0]) / expected),
    );
    Ok(r)
}
