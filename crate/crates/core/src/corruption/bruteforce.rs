//! Attack on the exhaustive row/column subset estimator.
//!
//! With `β*_{Λ*} = 1`, every outlier response is set to `√k` and copied into
//! one off-support column. Swapping the first true column for that column
//! then explains all outliers exactly with unit coefficients, and with enough
//! outliers this beats every fit that uses the true support.

use super::row_attack_start;
use crate::error::{Error, Result};
use crate::model::{RegressionInstance, SparseSignal};

/// Smallest column index outside the true support.
pub fn designated_column(truth: &SparseSignal) -> Option<usize> {
    (0..truth.dimension()).find(|&j| !truth.support().contains(j))
}

pub fn attack_bruteforce(inst: &RegressionInstance) -> Result<RegressionInstance> {
    if inst.truth.values().iter().any(|&v| v != 1.0) {
        return Err(Error::InvalidParameter(
            "the exhaustive-search attack needs an all-ones signal".into(),
        ));
    }
    let col = designated_column(&inst.truth).ok_or_else(|| {
        Error::InvalidParameter("no column outside the true support".into())
    })?;
    let mut out = row_attack_start(inst, "bruteforce")?;
    let value = (inst.k() as f64).sqrt();
    for i in inst.outlier_rows() {
        let row = out.x.row_mut(i);
        row.fill(0.0);
        row[col] = value;
        out.y[i] = value;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::assert_only_ledger_cells_changed;
    use super::*;
    use crate::datagen::{assemble_instance, InstanceParams, SignalScheme, SignalValues};
    use crate::model::{submatrix, SupportSet};

    fn ones_instance(k: usize, support: Vec<usize>) -> RegressionInstance {
        assemble_instance(
            &InstanceParams {
                n: 30,
                n1: 6,
                p: 12,
                design: Default::default(),
                signal: SignalScheme::ones(k).with_support(support),
                sigma_e: 2.0,
            },
            11,
        )
        .unwrap()
    }

    #[test]
    fn outlier_rows_follow_the_recipe() {
        let inst = ones_instance(4, vec![0, 2, 5, 7]);
        let out = attack_bruteforce(&inst).unwrap();
        assert_eq!(designated_column(&inst.truth), Some(1));
        for i in inst.outlier_rows() {
            assert_eq!(out.y[i], 2.0);
            assert_eq!(out.x.get(i, 1), out.y[i]);
            for j in [0, 2, 5, 7, 3, 11] {
                assert_eq!(out.x.get(i, j), 0.0);
            }
        }
        assert_only_ledger_cells_changed(&inst, &out);
    }

    #[test]
    fn alternative_support_fits_the_outliers_exactly() {
        let inst = ones_instance(3, vec![0, 1, 2]);
        let out = attack_bruteforce(&inst).unwrap();
        // Λ̂ = (Λ* minus its first element) ∪ {designated column}.
        let alt = SupportSet::new(vec![1, 2, 3], 12).unwrap();
        let xo = submatrix(&out.x, &inst.outlier_rows(), &alt).unwrap();
        let fit = xo.matvec(&[1.0, 1.0, 1.0]);
        for (f, i) in fit.iter().zip(inst.outlier_rows()) {
            assert_eq!(out.y[i] - f, 0.0);
        }
    }

    #[test]
    fn rejects_other_signals() {
        let inst = assemble_instance(
            &InstanceParams {
                n: 10,
                n1: 2,
                p: 6,
                design: Default::default(),
                signal: SignalScheme {
                    values: SignalValues::Fixed {
                        values: vec![1.0, -1.0],
                    },
                    k: 2,
                    support: Default::default(),
                },
                sigma_e: 1.0,
            },
            1,
        )
        .unwrap();
        assert!(attack_bruteforce(&inst).is_err());

        let full = assemble_instance(
            &InstanceParams {
                n: 10,
                n1: 2,
                p: 3,
                design: Default::default(),
                signal: SignalScheme::ones(3),
                sigma_e: 1.0,
            },
            1,
        )
        .unwrap();
        assert!(attack_bruteforce(&full).is_err());
    }
}
