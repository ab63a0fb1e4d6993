//! Adversarial corruption of regression instances.
//!
//! Every attack takes a clean instance (as produced by
//! [`assemble_instance`](crate::datagen::assemble_instance)) and returns a new
//! one with the corrupted cells overwritten and recorded in the ledger. Row
//! attacks rewrite the outlier rows `𝒪` (the complement of `authentic_rows`);
//! the distributed attack writes individual cells in any row.

mod bruteforce;
mod distributed;
mod feasibility;
mod sco;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use bruteforce::{attack_bruteforce, designated_column};
pub use distributed::{corrupt_distributed, distributed_magnitudes, DistributedMagnitudes};
pub use feasibility::{
    attack_feasibility, attack_feasibility_with, l1_constrained_least_squares, project_l1_ball,
    solve_theta_star, L1Fit, L1Options,
};
pub use sco::{attack_sco, attack_sco_detailed, huber_loss, ScoAttack, DEFAULT_SCO_MAGNITUDE};

use crate::error::{Error, Result};
use crate::model::{CorruptionLedger, CorruptionModel, RegressionInstance, SparseSignal};
use crate::rng::{stream, Purpose};

/// Which adversary to run, with its parameters. Parameterless attacks are
/// empty struct variants so that stray fields are rejected on input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum AttackSpec {
    /// Leave the instance untouched.
    None {},
    Sco {
        #[serde(default = "default_magnitude")]
        magnitude: f64,
    },
    Bruteforce {},
    Feasibility {},
    RandomRows {
        scale: f64,
    },
    /// Distributed-model attack with a per-column budget equal to the
    /// instance's outlier count.
    DistributedMass {},
}

fn default_magnitude() -> f64 {
    DEFAULT_SCO_MAGNITUDE
}

impl AttackSpec {
    pub fn label(&self) -> &'static str {
        match self {
            AttackSpec::None {} => "none",
            AttackSpec::Sco { .. } => "sco",
            AttackSpec::Bruteforce {} => "bruteforce",
            AttackSpec::Feasibility {} => "feasibility",
            AttackSpec::RandomRows { .. } => "random_rows",
            AttackSpec::DistributedMass {} => "distributed_mass",
        }
    }

    pub fn apply(&self, inst: &RegressionInstance, seed: u64) -> Result<RegressionInstance> {
        match *self {
            AttackSpec::None {} => Ok(inst.clone()),
            AttackSpec::Sco { magnitude } => attack_sco(inst, magnitude, seed),
            AttackSpec::Bruteforce {} => attack_bruteforce(inst),
            AttackSpec::Feasibility {} => attack_feasibility(inst, seed),
            AttackSpec::RandomRows { scale } => random_row_corruption(inst, scale, seed),
            AttackSpec::DistributedMass {} => corrupt_distributed(inst, inst.n_outliers(), seed),
        }
    }
}

/// Overwrite every outlier row with i.i.d. `N(0, scale²)` covariates and response.
pub fn random_row_corruption(
    inst: &RegressionInstance,
    scale: f64,
    seed: u64,
) -> Result<RegressionInstance> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale {scale} must be >= 0")));
    }
    let mut out = row_attack_start(inst, "random_rows")?;
    let mut rng = stream(seed, Purpose::Attack);
    for i in inst.outlier_rows() {
        for v in out.x.row_mut(i) {
            *v = scale * rng.sample::<f64, _>(StandardNormal);
        }
        out.y[i] = scale * rng.sample::<f64, _>(StandardNormal);
    }
    Ok(out)
}

fn require_clean(inst: &RegressionInstance) -> Result<()> {
    inst.validate()?;
    if inst.ledger.model != CorruptionModel::None {
        return Err(Error::InvalidParameter(format!(
            "instance already carries the '{}' attack",
            inst.ledger.attack
        )));
    }
    Ok(())
}

/// Clone `inst` with a row-model ledger that marks every outlier row.
fn row_attack_start(inst: &RegressionInstance, name: &str) -> Result<RegressionInstance> {
    require_clean(inst)?;
    let mut out = inst.clone();
    let outliers = inst.outlier_rows();
    out.ledger = CorruptionLedger::new(CorruptionModel::Row, outliers.len(), name);
    for &i in &outliers {
        out.ledger.mark_row(i, inst.p());
    }
    Ok(out)
}

/// Uniformly random size-`k` subset of the columns outside the true support.
fn sample_decoy<R: Rng + ?Sized>(rng: &mut R, truth: &SparseSignal) -> Result<Vec<usize>> {
    let (p, k) = (truth.dimension(), truth.sparsity());
    if p < 2 * k {
        return Err(Error::InvalidParameter(format!(
            "a decoy support of size {k} disjoint from the truth needs p >= {}, got {p}",
            2 * k
        )));
    }
    let pool = truth.support().complement(p);
    let mut decoy: Vec<usize> = index::sample(rng, pool.len(), k)
        .into_iter()
        .map(|t| pool[t])
        .collect();
    decoy.sort_unstable();
    Ok(decoy)
}

fn sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::datagen::{assemble_instance, InstanceParams, SignalScheme};
    use crate::model::{Cell, RegressionInstance};

    pub fn clean(n: usize, n1: usize, p: usize, k: usize, sigma_e: f64, seed: u64) -> RegressionInstance {
        assemble_instance(
            &InstanceParams {
                n,
                n1,
                p,
                design: Default::default(),
                signal: SignalScheme::pm_one(k),
                sigma_e,
            },
            seed,
        )
        .unwrap()
    }

    /// Every cell that differs between `before` and `after` is in the ledger.
    pub fn assert_only_ledger_cells_changed(before: &RegressionInstance, after: &RegressionInstance) {
        let touched = &after.ledger.touched;
        for i in 0..before.total_rows() {
            for j in 0..before.p() {
                if before.x.get(i, j).to_bits() != after.x.get(i, j).to_bits() {
                    assert!(touched.contains(&Cell::covariate(i, j)), "X[{i},{j}] changed");
                }
            }
            if before.y[i].to_bits() != after.y[i].to_bits() {
                assert!(touched.contains(&Cell::response(i)), "y[{i}] changed");
            }
        }
        assert!(after.ledger.within_budget(after.p()));
        assert_eq!(before.truth, after.truth);
        assert_eq!(before.authentic_rows, after.authentic_rows);
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn random_rows_touch_exactly_the_outliers() {
        let inst = clean(30, 4, 20, 3, 0.5, 1);
        let out = random_row_corruption(&inst, 2.0, 9).unwrap();
        assert_only_ledger_cells_changed(&inst, &out);
        let rows: Vec<usize> = out.ledger.touched_rows().into_iter().collect();
        assert_eq!(rows, inst.outlier_rows());
        assert_eq!(out.ledger.model, CorruptionModel::Row);
    }

    #[test]
    fn random_rows_degenerate_cases() {
        let inst = clean(30, 4, 20, 3, 0.5, 2);
        let zero = random_row_corruption(&inst, 0.0, 1).unwrap();
        for i in inst.outlier_rows() {
            assert!(zero.x.row(i).iter().all(|&v| v == 0.0));
            assert_eq!(zero.y[i], 0.0);
        }
        let none = clean(30, 0, 20, 3, 0.5, 2);
        let out = random_row_corruption(&none, 5.0, 1).unwrap();
        assert_eq!(out.x, none.x);
        assert_eq!(out.y, none.y);
        assert!(out.ledger.touched.is_empty());
    }

    #[test]
    fn attacks_refuse_already_attacked_instances() {
        let inst = clean(30, 4, 20, 3, 0.5, 3);
        let once = random_row_corruption(&inst, 1.0, 1).unwrap();
        assert!(random_row_corruption(&once, 1.0, 1).is_err());
    }

    #[test]
    fn spec_serde_shapes() {
        let s: AttackSpec = serde_json::from_str(r#"{"name":"sco"}"#).unwrap();
        assert_eq!(s, AttackSpec::Sco { magnitude: 1e3 });
        let s: AttackSpec = serde_json::from_str(r#"{"name":"feasibility"}"#).unwrap();
        assert_eq!(s.label(), "feasibility");
        assert!(serde_json::from_str::<AttackSpec>(r#"{"name":"feasibility","magnitude":3}"#).is_err());
        let s = AttackSpec::RandomRows { scale: 0.5 };
        let back: AttackSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn decoy_is_disjoint_and_sized() {
        let inst = clean(10, 0, 12, 6, 0.0, 4);
        let mut rng = stream(1, Purpose::Attack);
        let d = sample_decoy(&mut rng, &inst.truth).unwrap();
        assert_eq!(d.len(), 6);
        assert!(d.iter().all(|&j| !inst.truth.support().contains(j)));
        let tight = clean(10, 0, 11, 6, 0.0, 4);
        assert!(sample_decoy(&mut rng, &tight.truth).is_err());
    }
}
