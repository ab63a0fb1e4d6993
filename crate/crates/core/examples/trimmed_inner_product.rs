//! The trimmed inner product drops the largest products before summing, so a
//! few planted entries cannot move it far.
//!
//! cargo run --example trimmed_inner_product

use romp::estimators::trimmed_inner_product;

fn main() -> romp::Result<()> {
    let a = [0.5, -0.2, 0.1, 0.3, 40.0, -0.4];
    let b = [1.0, 1.0, -1.0, 1.0, 1.0, -1.0];
    let plain: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    println!("plain inner product  {plain:.3}");
    for n1 in 0..=2 {
        println!("trimmed, n1 = {n1}      {:.3}", trimmed_inner_product(&a, &b, n1)?);
    }
    Ok(())
}
