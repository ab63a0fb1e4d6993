//! Distributed-model adversary (`distributed_mass`).
//!
//! The budget is per column: up to `n1` cells of `y` and of every column of `X`
//! may be rewritten, in any rows. The attack targets the trimmed inner
//! product directly.
//!
//! * `n1` response cells are set to `−a · sign⟨x_i, β*⟩`, pulling the true
//!   columns' scores toward zero. `a = 2√(log p) · s_y`, where
//!   `s_y = √((‖β*‖² + σ_e²)/n)` is the clean response scale.
//! * On a decoy support of `k` columns disjoint from `Λ*`, `n1` cells per
//!   column are set so that `X_ij y_i = τ > 0` with `τ = 2 log(p)/n`, twice
//!   the typical ceiling of clean products. These sit among the larger clean
//!   products, so trimming cannot strip them without also discarding inliers.
//!
//! Decoy cells prefer rows with `|y_i| ≥ s_y` so the planted covariates stay
//! at clean magnitudes; if too few such rows exist the product falls short
//! of `τ` rather than blowing up the covariate.

use rand::seq::SliceRandom;

use super::{require_clean, sample_decoy};
use crate::error::{Error, Result};
use crate::model::{Cell, CorruptionLedger, CorruptionModel, RegressionInstance};
use crate::rng::{stream, Purpose};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistributedMagnitudes {
    /// Clean response scale `s_y`.
    pub response_scale: f64,
    /// Magnitude written into corrupted responses.
    pub response: f64,
    /// Target product `τ` on decoy cells.
    pub product: f64,
}

pub fn distributed_magnitudes(inst: &RegressionInstance) -> DistributedMagnitudes {
    let n = inst.n() as f64;
    let log_p = (inst.p() as f64).ln();
    let s_y = ((inst.truth.norm2().powi(2) + inst.noise_sigma.powi(2)) / n).sqrt();
    DistributedMagnitudes {
        response_scale: s_y,
        response: 2.0 * log_p.sqrt() * s_y,
        product: 2.0 * log_p / n,
    }
}

pub fn corrupt_distributed(inst: &RegressionInstance, n1: usize, seed: u64) -> Result<RegressionInstance> {
    require_clean(inst)?;
    let rows = inst.total_rows();
    if n1 > rows {
        return Err(Error::InvalidParameter(format!(
            "per-column budget {n1} exceeds the {rows} rows"
        )));
    }
    let mut out = inst.clone();
    out.ledger = CorruptionLedger::new(CorruptionModel::Distributed, n1, "distributed_mass");
    if n1 == 0 {
        return Ok(out);
    }

    let mut rng = stream(seed, Purpose::Attack);
    let mags = distributed_magnitudes(inst);
    let beta = inst.truth.dense();
    let clean_fit = inst.x.matvec(&beta);

    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut rng);
    for &i in &order[..n1] {
        let s = if clean_fit[i] >= 0.0 { -1.0 } else { 1.0 };
        out.y[i] = s * mags.response;
        out.ledger.touched.insert(Cell::response(i));
    }

    let decoy = sample_decoy(&mut rng, &inst.truth)?;
    for j in decoy {
        order.shuffle(&mut rng);
        let (mut big, small): (Vec<usize>, Vec<usize>) = order
            .iter()
            .partition(|&&i| out.y[i].abs() >= mags.response_scale);
        big.extend(small);
        for &i in &big[..n1] {
            let yi = out.y[i];
            let s = if yi >= 0.0 { 1.0 } else { -1.0 };
            out.x.set(i, j, s * mags.product / yi.abs().max(mags.response_scale));
            out.ledger.touched.insert(Cell::covariate(i, j));
        }
    }
    Ok(out)
}
