//! Lasso and the Justice Pursuit variants on an attacked instance, each at a
//! fixed (λ, γ), compared with RoMP.
//!
//! cargo run --release --example baselines

use romp::corruption::attack_feasibility;
use romp::datagen::{assemble_instance, InstanceParams, SignalScheme};
use romp::estimators::{jp_fill, jp_row, justice_pursuit, lasso, romp, top_k_support, CdProblem};

fn main() -> romp::Result<()> {
    let (n, n1, k) = (160, 10, 10);
    let clean = assemble_instance(
        &InstanceParams {
            n,
            n1,
            p: 400,
            design: Default::default(),
            signal: SignalScheme::pm_one(k),
            sigma_e: 2.0,
        },
        3,
    )?;
    let inst = attack_feasibility(&clean, 3)?;
    let truth = inst.truth.support();
    let (x, y) = (&inst.x, &inst.y);
    let lambda = 0.1 * CdProblem::new(x, y)?.lambda_max();
    let gamma = 0.1 * y.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let report = |name: &str, beta: &[f64]| -> romp::Result<()> {
        let s = top_k_support(beta, k)?;
        let nz = beta.iter().filter(|b| **b != 0.0).count();
        println!("{name:8} {} of {k} correct, {nz} nonzero", s.intersection_count(truth));
        Ok(())
    };
    report("romp", &romp(x, y, k, n1)?.beta_hat)?;
    report("lasso", &lasso(x, y, lambda)?.beta)?;
    report("jp", &justice_pursuit(x, y, lambda, gamma)?.beta)?;
    report("jp_fill", &jp_fill(x, y, n1, lambda, gamma)?.beta)?;
    report("jp_row", &jp_row(x, y, n1, lambda, gamma)?.fit.beta)?;
    Ok(())
}
