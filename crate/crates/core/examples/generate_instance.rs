//! Sample a clean instance with reserved outlier rows and print its shape
//! and ground truth.
//!
//! cargo run --example generate_instance

use romp::datagen::{assemble_instance, InstanceParams, SignalScheme};

fn main() -> romp::Result<()> {
    let params = InstanceParams {
        n: 200,
        n1: 10,
        p: 300,
        design: Default::default(),
        signal: SignalScheme::pm_one(5),
        sigma_e: 0.5,
    };
    let inst = assemble_instance(&params, 42)?;
    println!(
        "{} rows ({} authentic, {} reserved for the adversary), {} columns",
        inst.total_rows(),
        inst.n(),
        inst.n_outliers(),
        inst.p()
    );
    println!("support {:?}", inst.truth.support().as_slice());
    println!("values  {:?}", inst.truth.values());
    println!("outlier rows {:?}", inst.outlier_rows());
    let json = serde_json::to_string(&inst)?;
    println!("JSON size {} bytes", json.len());
    Ok(())
}
