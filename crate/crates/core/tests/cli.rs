use std::path::Path;
use std::process::{Command, Output};

use romp::estimators::EstimatorResult;
use romp::harness::{SweepReport, CSV_HEADER};
use romp::model::RegressionInstance;
use romp::probes::ProbeReport;

fn romp_cmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_romp"))
        .args(args)
        .env("ROMP_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generate_attack_solve_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let attacked = dir.path().join("attacked.json");
    let ledger = dir.path().join("ledger.json");
    let result = dir.path().join("result.json");
    let s = |p: &Path| p.to_str().unwrap().to_string();

    ok(&romp_cmd(&[
        "generate", "--n", "120", "--n1", "6", "--p", "150", "--k", "4", "--sigma-e", "0.5", "--seed", "3",
        "--out", &s(&inst),
    ]));
    let clean: RegressionInstance = read(&inst);
    assert_eq!((clean.total_rows(), clean.p(), clean.k()), (126, 150, 4));

    ok(&romp_cmd(&[
        "attack", "--input", &s(&inst), "--attack", "feasibility", "--seed", "3", "--out", &s(&attacked),
        "--ledger", &s(&ledger),
    ]));
    let bad: RegressionInstance = read(&attacked);
    assert_eq!(bad.ledger.attack, "feasibility");
    let ledger_only: romp::model::CorruptionLedger = read(&ledger);
    assert_eq!(ledger_only, bad.ledger);

    ok(&romp_cmd(&[
        "solve", "--input", &s(&attacked), "--estimator", "romp", "--k", "4", "--n1", "6", "--out", &s(&result),
    ]));
    let r: EstimatorResult = read(&result);
    assert_eq!(r.support_hat.len(), 4);
    assert_eq!(r.beta_hat.len(), 150);

    // Defaults for k and n1 come from the instance.
    let out = romp_cmd(&["solve", "--input", &s(&attacked), "--estimator", "jp-row", "--lambda-rel", "0.2"]);
    ok(&out);
    let r: EstimatorResult = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.support_hat.len(), 4);
    assert!(r.diagnostics.objective.is_some());
}

#[test]
fn generated_instances_survive_the_json_round_trip() {
    let out = romp_cmd(&["generate", "--n", "20", "--p", "30", "--k", "2", "--seed", "9"]);
    ok(&out);
    let inst: RegressionInstance = serde_json::from_slice(&out.stdout).unwrap();
    let again = serde_json::to_string_pretty(&inst).unwrap() + "\n";
    assert_eq!(again.as_bytes(), &out.stdout[..]);
}

#[test]
fn probe_prints_a_report() {
    let out = romp_cmd(&["probe", "max-subgaussian", "--m", "50", "--p", "10", "--trials", "200", "--seed", "1"]);
    ok(&out);
    let r: ProbeReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.probe, "max_subgaussian");
    assert_eq!(r.trials, 200);
    assert!((0.0..=1.0).contains(&r.violation_rate));
}

const TINY: &str = r#"{
  "p": 40, "n": 30, "k": 2, "sigma_e": 0.5,
  "attack": {"name": "feasibility"},
  "estimators": [
    {"name": "romp"},
    {"name": "lasso", "lambda": {"low": 0.05, "high": 1.0, "points": 3}},
    {"name": "jp_row", "lambda": {"low": 0.05, "high": 1.0, "points": 2}, "gamma": {"low": 0.1, "high": 1.0, "points": 2}}
  ],
  "fractions": [0.0, 0.1],
  "trials": 2,
  "seed": 5
}"#;

#[test]
fn benchmark_writes_reports_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, TINY).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&romp_cmd(&["benchmark", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    }
    for file in ["report.csv", "report.json", "support_recovery.svg", "relative_l2_error.svg"] {
        let x = std::fs::read(a.join(file)).unwrap();
        assert_eq!(x, std::fs::read(b.join(file)).unwrap(), "{file} differs between runs");
    }
    assert!(a.join("timings.csv").exists());
    let csv = std::fs::read_to_string(a.join("report.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert_eq!(csv.lines().count(), 1 + 3 * 2 * 2);
    let report: SweepReport = read(&a.join("report.json"));
    assert_eq!(report.failures(), 0);
}

#[test]
fn benchmark_exits_nonzero_when_trials_fail() {
    // Outlier rows at 1e300 overflow every column norm.
    let cfg = TINY.replace(r#"{"name": "feasibility"}"#, r#"{"name": "random_rows", "scale": 1e300}"#);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, cfg).unwrap();
    let out = romp_cmd(&["benchmark", "--config", path.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(!out.status.success());
    let report: SweepReport = read(&dir.path().join("o/report.json"));
    assert!(report.failures() > 0);
}

#[test]
fn bad_inputs_are_reported() {
    let out = romp_cmd(&["solve", "--input", "/nonexistent/inst.json", "--estimator", "romp"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/inst.json"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, TINY.replace(r#""trials": 2"#, r#""trials": 2, "unknown": 1"#)).unwrap();
    let out = romp_cmd(&["benchmark", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());

    let bad_threads = Command::new(env!("CARGO_BIN_EXE_romp"))
        .args(["probe", "concentration", "--trials", "5"])
        .env("ROMP_THREADS", "many")
        .output()
        .unwrap();
    assert!(!bad_threads.status.success());
}
