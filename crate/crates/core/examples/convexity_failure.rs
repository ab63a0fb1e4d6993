//! The attack against convex estimators: Justice Pursuit picks the wrong
//! support at every point of a (λ, γ) grid, while RoMP is unaffected.
//!
//! cargo run --release --example convexity_failure

use romp::corruption::attack_sco;
use romp::datagen::{assemble_instance, InstanceParams, SignalScheme};
use romp::estimators::{romp, top_k_support, CdOptions, CdProblem};

fn main() -> romp::Result<()> {
    let (n, n1, k) = (300, 5, 5);
    let clean = assemble_instance(
        &InstanceParams {
            n,
            n1,
            p: 500,
            design: Default::default(),
            signal: SignalScheme::pm_one(k),
            sigma_e: 0.5,
        },
        11,
    )?;
    let inst = attack_sco(&clean, 1e3, 11)?;
    let truth = inst.truth.support();
    let r = romp(&inst.x, &inst.y, k, n1)?;
    println!("romp correct: {}", r.support_hat == *truth);

    let prob = CdProblem::new(&inst.x, &inst.y)?;
    let y_inf = inst.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("jp correct entries per grid point (rows λ, columns γ):");
    for i in 0..5 {
        let lambda = prob.lambda_max() * 10f64.powf(-4.0 + 0.9 * i as f64);
        let row: Vec<String> = (0..5)
            .map(|j| {
                let gamma = y_inf * 10f64.powf(-4.0 + 0.9 * j as f64);
                match prob.solve(lambda, Some(gamma), None, &CdOptions::default()) {
                    Ok(fit) => top_k_support(&fit.beta, k)
                        .map(|s| s.intersection_count(truth).to_string())
                        .unwrap_or_else(|e| e.to_string()),
                    Err(e) => e.to_string(),
                }
            })
            .collect();
        println!("  λ = {lambda:9.2e}: {}", row.join(" "));
    }
    Ok(())
}
