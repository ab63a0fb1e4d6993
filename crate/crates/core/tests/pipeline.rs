use romp::corruption::AttackSpec;
use romp::harness::{prepare_instance, run_sweep, run_trial, trial_seed, EstimatorSpec, ExperimentConfig, Grid};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        p: 120,
        n: 80,
        k: 3,
        sigma_e: 0.5,
        fractions: vec![0.0, 0.05],
        trials: 3,
        estimators: vec![
            EstimatorSpec::Romp {},
            EstimatorSpec::Omp {},
            EstimatorSpec::JpFill {
                lambda: Grid { low: 0.05, high: 1.0, points: 3 },
                gamma: Grid { low: 0.05, high: 1.0, points: 2 },
                fill_scale: 1.0,
            },
        ],
        ..ExperimentConfig::desk()
    }
}

#[test]
fn sweep_reports_are_identical_across_runs() {
    let c = small();
    let a = serde_json::to_string(&run_sweep(&c).unwrap().report).unwrap();
    let b = serde_json::to_string(&run_sweep(&c).unwrap().report).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweep_records_match_single_trials() {
    let c = small();
    let report = run_sweep(&c).unwrap().report;
    for (g, &f) in c.fractions.iter().enumerate() {
        for t in 0..c.trials {
            for spec in &c.estimators {
                let single = run_trial(&c, spec, f, t, trial_seed(&c, g, t));
                let swept = report
                    .records
                    .iter()
                    .find(|r| r.estimator == spec.label() && r.n1 == single.n1 && r.trial == t)
                    .unwrap();
                assert_eq!(&single, swept);
            }
        }
    }
}

#[test]
fn all_estimators_share_one_instance_per_trial() {
    let c = small();
    let seed = trial_seed(&c, 1, 2);
    let a = prepare_instance(&c, c.n1_for(0.05), seed).unwrap();
    let b = prepare_instance(&c, c.n1_for(0.05), seed).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.n_outliers(), 4);
    assert_eq!(a.ledger.attack, "feasibility");
}

#[test]
fn romp_is_perfect_on_an_easy_clean_sweep() {
    let c = ExperimentConfig {
        sigma_e: 0.0,
        fractions: vec![0.0],
        estimators: vec![EstimatorSpec::Romp {}],
        attack: AttackSpec::None {},
        n: 400,
        ..small()
    };
    let report = run_sweep(&c).unwrap().report;
    let agg = report.aggregate_for("romp", 0).unwrap();
    assert_eq!(agg.recovery_mean, 1.0);
    assert_eq!(agg.recovery_std, 0.0);
}
