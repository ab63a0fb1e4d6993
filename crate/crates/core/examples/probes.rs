//! Monte Carlo probes of the concentration and deviation bounds behind RoMP,
//! at reduced trial counts.
//!
//! cargo run --release --example probes

use romp::probes::{
    probe_bruteforce_failure, probe_concentration, probe_h_deviation, probe_max_subgaussian, ProbeReport,
};

fn show(r: &ProbeReport) {
    println!("{} ({} trials): violation rate {:.4}", r.probe, r.trials, r.violation_rate);
    for (name, f) in &r.fitted {
        println!("  {name} = {:.3} [{:.3}, {:.3}]", f.value, f.ci_low, f.ci_high);
    }
}

fn main() -> romp::Result<()> {
    show(&probe_max_subgaussian(1000, 100.0, 1.0, 2000, 1)?);
    show(&probe_concentration(400, 1000.0, 2000, 2)?);
    show(&probe_h_deviation(500, 300, 5, 0.5, &[0, 10, 20], 20, 3)?);
    show(&probe_bruteforce_failure(100, 4, 2000, 1200, 20, 4)?);
    Ok(())
}
