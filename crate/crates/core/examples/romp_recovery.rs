//! RoMP on a clean instance and on the same instance after the feasibility
//! attack, next to plain matching pursuit.
//!
//! cargo run --release --example romp_recovery

use romp::corruption::attack_feasibility;
use romp::datagen::{assemble_instance, InstanceParams, SignalScheme};
use romp::estimators::{matching_pursuit_omp, romp};

fn main() -> romp::Result<()> {
    let (n, n1, k) = (300, 5, 5);
    let params = InstanceParams {
        n,
        n1,
        p: 500,
        design: Default::default(),
        signal: SignalScheme::pm_one(k),
        sigma_e: 0.5,
    };
    let clean = assemble_instance(&params, 7)?;
    let attacked = attack_feasibility(&clean, 7)?;
    let truth = clean.truth.support();
    println!("true support        {:?}", truth.as_slice());
    for (name, inst) in [("clean", &clean), ("attacked", &attacked)] {
        let r = romp(&inst.x, &inst.y, k, n1)?;
        let o = matching_pursuit_omp(&inst.x, &inst.y, k)?;
        println!(
            "{name:9} romp {:?} ({} correct)  omp {:?} ({} correct)",
            r.support_hat.as_slice(),
            r.support_hat.intersection_count(truth),
            o.support_hat.as_slice(),
            o.support_hat.intersection_count(truth)
        );
    }
    Ok(())
}
