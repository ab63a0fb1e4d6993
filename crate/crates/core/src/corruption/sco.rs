//! Decoy-support attack against convex estimators.
//!
//! The adversary copies the true coefficients onto a decoy support `Λ̂`
//! disjoint from `Λ*`, zeroes the outlier rows on `Λ*`, puts large entries on
//! `Λ̂` and makes the outlier responses perfectly consistent with the decoy.
//! Any estimate supported on `Λ*` then pays for the full outlier response.

use super::{require_clean, row_attack_start, sample_decoy, sign};
use crate::error::{Error, Result};
use crate::model::{RegressionInstance, SupportSet};
use crate::rng::{stream, Purpose};

pub const DEFAULT_SCO_MAGNITUDE: f64 = 1e3;

#[derive(Clone, Debug)]
pub struct ScoAttack {
    pub instance: RegressionInstance,
    pub decoy: SupportSet,
    /// Dense decoy estimate: `β*_{Λ*}` copied in order onto `Λ̂`.
    pub beta_decoy: Vec<f64>,
}

pub fn attack_sco(inst: &RegressionInstance, magnitude: f64, seed: u64) -> Result<RegressionInstance> {
    attack_sco_detailed(inst, magnitude, seed).map(|a| a.instance)
}

pub fn attack_sco_detailed(inst: &RegressionInstance, magnitude: f64, seed: u64) -> Result<ScoAttack> {
    require_clean(inst)?;
    if !(magnitude >= 0.0 && magnitude.is_finite()) {
        return Err(Error::InvalidParameter(format!("magnitude {magnitude} must be >= 0")));
    }
    let mut rng = stream(seed, Purpose::Attack);
    let p = inst.p();
    let decoy = sample_decoy(&mut rng, &inst.truth)?;
    let mut beta_decoy = vec![0.0; p];
    for (&j, &v) in decoy.iter().zip(inst.truth.values()) {
        beta_decoy[j] = v;
    }

    let mut out = row_attack_start(inst, "sco")?;
    let entry = magnitude / (inst.n() as f64).sqrt();
    for i in inst.outlier_rows() {
        let row = out.x.row_mut(i);
        row.fill(0.0);
        let mut yi = 0.0;
        for &j in &decoy {
            row[j] = entry * sign(&mut rng);
            yi += row[j] * beta_decoy[j];
        }
        out.y[i] = yi;
    }
    Ok(ScoAttack {
        instance: out,
        decoy: SupportSet::new(decoy, p)?,
        beta_decoy,
    })
}

/// The squared-loss Justice Pursuit objective with `β` fixed, minimized over
/// `z`: `Σ_i ψ_γ(r_i)` with the Huber function `ψ_γ`.
pub fn huber_loss(residual: &[f64], gamma: f64) -> f64 {
    residual
        .iter()
        .map(|&r| {
            let a = r.abs();
            if a <= gamma {
                0.5 * r * r
            } else {
                gamma * a - 0.5 * gamma * gamma
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::estimators::{justice_pursuit, soft_threshold, top_k_support};
    use crate::model::norm2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn single_coefficient_construction() {
        let inst = clean(20, 3, 8, 1, 0.1, 1);
        let a = attack_sco_detailed(&inst, 10.0, 2).unwrap();
        let star = inst.truth.support().as_slice()[0];
        let j = a.decoy.as_slice()[0];
        assert_ne!(j, star);
        for i in inst.outlier_rows() {
            let row = a.instance.x.row(i);
            assert_eq!(row[star], 0.0);
            assert_eq!(row.iter().filter(|&&v| v != 0.0).count(), 1);
            assert_eq!(row[j].abs(), 10.0 / 20f64.sqrt());
            assert_eq!(a.instance.y[i], row[j] * inst.truth.values()[0]);
        }
        assert_only_ledger_cells_changed(&inst, &a.instance);
    }

    #[test]
    fn zero_magnitude_gives_zero_rows() {
        let inst = clean(20, 3, 10, 2, 0.1, 2);
        let out = attack_sco(&inst, 0.0, 1).unwrap();
        for i in inst.outlier_rows() {
            assert!(out.x.row(i).iter().all(|&v| v == 0.0));
            assert_eq!(out.y[i], 0.0);
        }
    }

    #[test]
    fn needs_room_for_a_decoy() {
        let inst = clean(20, 3, 5, 3, 0.1, 3);
        assert!(matches!(attack_sco(&inst, 1.0, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn huber_is_the_minimum_over_z() {
        let r = [3.0, -0.2, 0.0, -5.0, 0.7];
        let gamma = 0.5;
        let direct: f64 = r
            .iter()
            .map(|&ri| {
                let z = soft_threshold(-ri, gamma);
                0.5 * (ri + z).powi(2) + gamma * z.abs()
            })
            .sum();
        assert!((huber_loss(&r, gamma) - direct).abs() < 1e-12);
    }

    #[test]
    fn estimates_on_the_true_support_pay_at_least_the_outlier_response() {
        let inst = clean(60, 5, 40, 3, 0.5, 4);
        let a = attack_sco_detailed(&inst, 1e3, 5).unwrap();
        let x = &a.instance.x;
        let y = &a.instance.y;
        let outliers = inst.outlier_rows();
        // [0; X^O_Λ̂ β*] laid out over all rows.
        let xo_beta = x.matvec(&a.beta_decoy);
        let mut reference = vec![0.0; y.len()];
        for &i in &outliers {
            reference[i] = xo_beta[i];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let star = inst.truth.support().as_slice();
        for gamma in [1e-3, 0.1, 1.0, 10.0] {
            let floor = huber_loss(&reference, gamma);
            for _ in 0..50 {
                let mut beta = vec![0.0; inst.p()];
                for &j in star {
                    beta[j] = 3.0 * rng.sample::<f64, _>(StandardNormal);
                }
                let fit = x.matvec(&beta);
                let r: Vec<f64> = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
                assert!(huber_loss(&r, gamma) >= floor);
            }
        }
    }

    #[test]
    fn justice_pursuit_lands_on_the_decoy() {
        let inst = clean(120, 5, 150, 3, 0.5, 7);
        let a = attack_sco_detailed(&inst, 1e3, 8).unwrap();
        let (x, y) = (&a.instance.x, &a.instance.y);
        let lambda = 0.05 * norm2(&x.tr_matvec(y)) / (inst.p() as f64).sqrt();
        let fit = justice_pursuit(x, y, lambda, 1.0).unwrap();
        let support = top_k_support(&fit.beta, 3).unwrap();
        assert_ne!(&support, inst.truth.support());
    }
}
