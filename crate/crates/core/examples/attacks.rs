//! Apply every adversary to the same clean instance and summarize what each
//! one touched.
//!
//! cargo run --release --example attacks

use romp::corruption::AttackSpec;
use romp::datagen::{assemble_instance, InstanceParams, SignalScheme};

fn main() -> romp::Result<()> {
    let base = InstanceParams {
        n: 120,
        n1: 12,
        p: 80,
        design: Default::default(),
        signal: SignalScheme::pm_one(4),
        sigma_e: 0.5,
    };
    let ones = InstanceParams {
        signal: SignalScheme::ones(4),
        ..base.clone()
    };
    let attacks = [
        AttackSpec::Sco { magnitude: 1e3 },
        AttackSpec::Bruteforce {},
        AttackSpec::Feasibility {},
        AttackSpec::RandomRows { scale: 3.0 },
        AttackSpec::DistributedMass {},
    ];
    for spec in attacks {
        // The exhaustive-search attack assumes an all-ones signal.
        let params = if spec == (AttackSpec::Bruteforce {}) { &ones } else { &base };
        let clean = assemble_instance(params, 1)?;
        let out = spec.apply(&clean, 1)?;
        let counts = out.ledger.per_column_counts(out.p());
        println!(
            "{:17} {:?} model, {:4} cells in {:3} rows, max per column {}, y max |{:.2}|",
            spec.label(),
            out.ledger.model,
            out.ledger.touched.len(),
            out.ledger.touched_rows().len(),
            counts.iter().max().unwrap_or(&0),
            out.y.iter().fold(0.0f64, |m, v| m.max(v.abs()))
        );
    }
    Ok(())
}
