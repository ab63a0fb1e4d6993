//! Exhaustive search over row and column subsets at toy scale: exact on
//! clean data, fooled once enough rows are corrupted.
//!
//! cargo run --release --example brute_force

use romp::corruption::attack_bruteforce;
use romp::datagen::{assemble_instance, InstanceParams, SignalScheme};
use romp::estimators::{brute_force, DEFAULT_SIZE_GUARD};

fn main() -> romp::Result<()> {
    let (n, n1, p, k) = (6, 5, 6, 3);
    let params = InstanceParams {
        n,
        n1,
        p,
        design: Default::default(),
        signal: SignalScheme::ones(k),
        sigma_e: 0.0,
    };
    let clean = assemble_instance(&params, 5)?;
    let attacked = attack_bruteforce(&clean)?;
    println!("true support {:?}", clean.truth.support().as_slice());
    for (name, inst) in [("clean", &clean), ("attacked", &attacked)] {
        let fit = brute_force(&inst.x, &inst.y, n, k, DEFAULT_SIZE_GUARD)?;
        println!(
            "{name:9} support {:?}, objective {:.2e}, rows {:?}",
            fit.estimate.support_hat.as_slice(),
            fit.estimate.diagnostics.objective.unwrap_or(f64::NAN),
            fit.rows
        );
    }
    Ok(())
}
