//! Command-line front end: generate instances, attack them, run estimators,
//! run probes and benchmark sweeps. JSON goes to stdout unless `--out` is set.
//!
//! `ROMP_THREADS` caps the worker pool (default: all cores).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use romp::corruption::{AttackSpec, DEFAULT_SCO_MAGNITUDE};
use romp::datagen::{assemble_instance, DesignDistribution, InstanceParams, SignalScheme, SignalValues};
use romp::estimators::{
    brute_force, fill_matrix, matching_pursuit_omp, romp as romp_estimate, row_discard, CdFit, CdOptions,
    CdProblem, Diagnostics, EstimatorResult, DEFAULT_SIZE_GUARD,
};
use romp::harness::{emit_report, run_sweep, write_timings, ExperimentConfig, ReportFormat};
use romp::model::RegressionInstance;
use romp::probes;

#[derive(Parser)]
#[command(name = "romp", version, about = "Robust matching pursuit under adversarial corruption")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a clean instance with reserved outlier rows.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        n1: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma_e: f64,
        #[arg(long, value_enum, default_value_t = Signal::PmOne)]
        signal: Signal,
        #[arg(long, value_enum, default_value_t = Design::Gaussian)]
        design: Design,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corrupt the outlier rows (or cells) of a clean instance.
    Attack {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        attack: Attack,
        /// Decoy magnitude for `sco`.
        #[arg(long, default_value_t = DEFAULT_SCO_MAGNITUDE)]
        magnitude: f64,
        /// Entry scale for `random-rows`.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the corruption ledger on its own.
        #[arg(long)]
        ledger: Option<PathBuf>,
    },
    /// Run one estimator on an instance and print its result.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        estimator: Estimator,
        /// Sparsity; defaults to the instance's true sparsity.
        #[arg(long)]
        k: Option<usize>,
        /// Outlier count; defaults to the instance's outlier count.
        #[arg(long)]
        n1: Option<usize>,
        /// Absolute λ. Overrides `--lambda-rel`.
        #[arg(long)]
        lambda: Option<f64>,
        /// λ as a multiple of λ_max = ‖Xᵀy‖∞.
        #[arg(long, default_value_t = 0.1)]
        lambda_rel: f64,
        /// Absolute γ. Overrides `--gamma-rel`.
        #[arg(long)]
        gamma: Option<f64>,
        /// γ as a multiple of ‖y‖∞.
        #[arg(long, default_value_t = 0.1)]
        gamma_rel: f64,
        /// Magnitude of the clipped entries for `jp-fill`.
        #[arg(long, default_value_t = 1.0)]
        fill_scale: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo probes of the concentration and deviation bounds.
    Probe {
        #[command(subcommand)]
        probe: Probe,
        #[arg(long, global = true, default_value_t = 1000)]
        trials: usize,
        #[arg(long, global = true, default_value_t = 0)]
        seed: u64,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Sweep estimators over outlier fractions and write reports.
    Benchmark {
        /// Experiment config JSON. Without it, `--preset` is used.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Preset::Desk)]
        preset: Preset,
        /// Output directory; falls back to the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's trial count.
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Subcommand)]
enum Probe {
    /// Tail of the maximum of m sub-Gaussian variables.
    MaxSubgaussian {
        #[arg(long, default_value_t = 1000)]
        m: usize,
        #[arg(long, default_value_t = 1000.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
    /// Sum of squares and cross products of N(0, 1/n) pairs.
    Concentration {
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long, default_value_t = 1000.0)]
        p: f64,
    },
    /// Deviation of the trimmed inner products from the signal as n1 grows.
    HDeviation {
        #[arg(long, default_value_t = 500)]
        p: usize,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        sigma_e: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,5,10,15,20")]
        n1_grid: Vec<usize>,
    },
    /// Objective comparison behind the exhaustive-search failure.
    BruteforceFailure {
        #[arg(long, default_value_t = 2000)]
        p: usize,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 60)]
        n1: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Signal {
    PmOne,
    Ones,
}

#[derive(Clone, Copy, ValueEnum)]
enum Design {
    Gaussian,
    Rademacher,
}

#[derive(Clone, Copy, ValueEnum)]
enum Attack {
    None,
    Sco,
    Bruteforce,
    Feasibility,
    RandomRows,
    DistributedMass,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Romp,
    Omp,
    Lasso,
    Jp,
    JpFill,
    JpRow,
    BruteForce,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
    Full,
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

fn read_instance(path: &Path) -> AnyResult<RegressionInstance> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let inst: RegressionInstance = serde_json::from_str(&text)?;
    inst.validate()?;
    Ok(inst)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> AnyResult<()> {
    let mut json = serde_json::to_string_pretty(value)?;
    json.push('\n');
    match out {
        Some(path) => std::fs::write(path, json).map_err(|e| format!("{}: {e}", path.display()))?,
        None => print!("{json}"),
    }
    Ok(())
}

fn from_cd(fit: CdFit, k: usize, start: Instant) -> romp::Result<EstimatorResult> {
    let diagnostics = Diagnostics {
        iterations: fit.sweeps,
        objective: Some(fit.objective),
        converged: true,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    EstimatorResult::from_dense_top_k(fit.beta, k, diagnostics)
}

struct Tuning {
    lambda: Option<f64>,
    lambda_rel: f64,
    gamma: Option<f64>,
    gamma_rel: f64,
}

impl Tuning {
    fn solve(&self, x: &romp::model::Matrix, y: &[f64], huber: bool) -> romp::Result<CdFit> {
        let prob = CdProblem::new(x, y)?;
        let lambda = self.lambda.unwrap_or(self.lambda_rel * prob.lambda_max());
        let y_inf = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let gamma = huber.then(|| self.gamma.unwrap_or(self.gamma_rel * y_inf));
        prob.solve(lambda, gamma, None, &CdOptions::default())
    }
}

fn solve(
    inst: &RegressionInstance,
    estimator: Estimator,
    k: usize,
    n1: usize,
    tuning: &Tuning,
    fill_scale: f64,
) -> romp::Result<EstimatorResult> {
    let start = Instant::now();
    let (x, y) = (&inst.x, &inst.y);
    match estimator {
        Estimator::Romp => romp_estimate(x, y, k, n1),
        Estimator::Omp => matching_pursuit_omp(x, y, k),
        Estimator::Lasso => from_cd(tuning.solve(x, y, false)?, k, start),
        Estimator::Jp => from_cd(tuning.solve(x, y, true)?, k, start),
        Estimator::JpFill => from_cd(tuning.solve(&fill_matrix(x, n1, fill_scale), y, true)?, k, start),
        Estimator::JpRow => {
            let kept = row_discard(x, n1)?;
            let yk: Vec<f64> = kept.iter().map(|&i| y[i]).collect();
            from_cd(tuning.solve(&x.select_rows(&kept), &yk, true)?, k, start)
        }
        Estimator::BruteForce => Ok(brute_force(x, y, x.rows() - n1, k, DEFAULT_SIZE_GUARD)?.estimate),
    }
}

fn run(cli: Cli) -> AnyResult<bool> {
    match cli.command {
        Command::Generate {
            n,
            n1,
            p,
            k,
            sigma_e,
            signal,
            design,
            seed,
            out,
        } => {
            let params = InstanceParams {
                n,
                n1,
                p,
                design: match design {
                    Design::Gaussian => DesignDistribution::Gaussian,
                    Design::Rademacher => DesignDistribution::Rademacher,
                },
                signal: match signal {
                    Signal::PmOne => SignalScheme::pm_one(k),
                    Signal::Ones => SignalScheme {
                        values: SignalValues::Ones,
                        ..SignalScheme::pm_one(k)
                    },
                },
                sigma_e,
            };
            emit(&assemble_instance(&params, seed)?, out.as_deref())?;
        }
        Command::Attack {
            input,
            attack,
            magnitude,
            scale,
            seed,
            out,
            ledger,
        } => {
            let inst = read_instance(&input)?;
            let spec = match attack {
                Attack::None => AttackSpec::None {},
                Attack::Sco => AttackSpec::Sco { magnitude },
                Attack::Bruteforce => AttackSpec::Bruteforce {},
                Attack::Feasibility => AttackSpec::Feasibility {},
                Attack::RandomRows => AttackSpec::RandomRows { scale },
                Attack::DistributedMass => AttackSpec::DistributedMass {},
            };
            let attacked = spec.apply(&inst, seed)?;
            if let Some(path) = ledger {
                emit(&attacked.ledger, Some(&path))?;
            }
            emit(&attacked, out.as_deref())?;
        }
        Command::Solve {
            input,
            estimator,
            k,
            n1,
            lambda,
            lambda_rel,
            gamma,
            gamma_rel,
            fill_scale,
            out,
        } => {
            let inst = read_instance(&input)?;
            let k = k.unwrap_or(inst.k());
            let n1 = n1.unwrap_or(inst.n_outliers());
            let tuning = Tuning {
                lambda,
                lambda_rel,
                gamma,
                gamma_rel,
            };
            emit(&solve(&inst, estimator, k, n1, &tuning, fill_scale)?, out.as_deref())?;
        }
        Command::Probe {
            probe,
            trials,
            seed,
            out,
        } => {
            let report = match probe {
                Probe::MaxSubgaussian { m, p, sigma } => probes::probe_max_subgaussian(m, p, sigma, trials, seed)?,
                Probe::Concentration { n, p } => probes::probe_concentration(n, p, trials, seed)?,
                Probe::HDeviation {
                    p,
                    n,
                    k,
                    sigma_e,
                    n1_grid,
                } => probes::probe_h_deviation(p, n, k, sigma_e, &n1_grid, trials, seed)?,
                Probe::BruteforceFailure { p, k, n, n1 } => {
                    probes::probe_bruteforce_failure(p, k, n, n1, trials, seed)?
                }
            };
            emit(&report, out.as_deref())?;
        }
        Command::Benchmark {
            config,
            preset,
            out,
            trials,
        } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path)?,
                None => match preset {
                    Preset::Desk => ExperimentConfig::desk(),
                    Preset::Full => ExperimentConfig::full(),
                },
            };
            if let Some(t) = trials {
                cfg.trials = t;
            }
            let dir = out
                .or_else(|| cfg.output_dir.clone())
                .ok_or("no output directory: pass --out or set output_dir in the config")?;
            let start = Instant::now();
            let outcome = run_sweep(&cfg)?;
            let mut written = emit_report(
                &outcome.report,
                &dir,
                &[ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg],
            )?;
            written.push(write_timings(&outcome.timings, &dir)?);
            for a in &outcome.report.aggregates {
                eprintln!(
                    "{:8} n1={:<4} recovery {:.3} ± {:.3}  error {:.3} ± {:.3}  failed {}",
                    a.estimator, a.n1, a.recovery_mean, a.recovery_std, a.error_mean, a.error_std, a.failed
                );
            }
            for path in &written {
                eprintln!("wrote {}", path.display());
            }
            let failures = outcome.report.failures();
            eprintln!(
                "{} trials, {failures} failed, {:.1} s",
                outcome.report.records.len(),
                start.elapsed().as_secs_f64()
            );
            for r in outcome.report.records.iter().filter(|r| r.failed()) {
                eprintln!(
                    "failed: {} n1={} trial={}: {}",
                    r.estimator,
                    r.n1,
                    r.trial,
                    r.error.as_deref().unwrap_or_default()
                );
            }
            return Ok(failures == 0);
        }
    }
    Ok(true)
}

fn configure_threads() -> AnyResult<()> {
    if let Ok(v) = std::env::var("ROMP_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| format!("ROMP_THREADS must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
