//! A reduced benchmark sweep: every estimator over a few outlier fractions,
//! with CSV, JSON and SVG reports written to `target/benchmark_sweep`.
//!
//! cargo run --release --example benchmark_sweep

use std::path::Path;

use romp::harness::{emit_report, run_sweep, ExperimentConfig, ReportFormat};

fn main() -> romp::Result<()> {
    let config = ExperimentConfig {
        fractions: vec![0.0, 0.04, 0.08],
        trials: 3,
        ..ExperimentConfig::desk()
    };
    let outcome = run_sweep(&config)?;
    for a in &outcome.report.aggregates {
        println!(
            "{:8} n1 = {:2}: recovery {:.2} ± {:.2}, relative error {:.2} ± {:.2}",
            a.estimator, a.n1, a.recovery_mean, a.recovery_std, a.error_mean, a.error_std
        );
    }
    let dir = Path::new("target/benchmark_sweep");
    for path in emit_report(&outcome.report, dir, &[ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg])? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
