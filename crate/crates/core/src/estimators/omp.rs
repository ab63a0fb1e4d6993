use std::time::Instant;

use super::{elapsed_ms, Diagnostics, EstimatorResult};
use crate::error::{Error, Result};
use crate::model::{dot, least_squares, norm2, submatrix, Matrix, SupportSet};

/// Orthogonal matching pursuit with `k` greedy steps and a least-squares refit
/// after each one.
pub fn matching_pursuit_omp(x: &Matrix, y: &[f64], k: usize) -> Result<EstimatorResult> {
    let start = Instant::now();
    let (rows, p) = (x.rows(), x.cols());
    if y.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "X has {rows} rows but y has {} entries",
            y.len()
        )));
    }
    if k > p {
        return Err(Error::InvalidParameter(format!("sparsity {k} exceeds {p} columns")));
    }
    let all_rows: Vec<usize> = (0..rows).collect();
    let cols = x.columns();
    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut residual = y.to_vec();
    let mut theta = Vec::new();
    let mut support = SupportSet::empty();

    for _ in 0..k {
        let mut best: Option<(usize, f64)> = None;
        for (j, col) in cols.iter().enumerate() {
            if selected.contains(&j) {
                continue;
            }
            let c = dot(&residual, col).abs();
            if best.is_none_or(|(_, b)| c > b) {
                best = Some((j, c));
            }
        }
        let (j, _) = best.expect("k <= p leaves a candidate column");
        selected.push(j);
        support = SupportSet::new(selected.clone(), p)?;
        let xs = submatrix(x, &all_rows, &support)?;
        theta = least_squares(&xs, y)?;
        let fit = xs.matvec(&theta);
        for (r, (yi, fi)) in residual.iter_mut().zip(y.iter().zip(&fit)) {
            *r = yi - fi;
        }
    }

    let mut beta_hat = vec![0.0; p];
    for (j, t) in support.iter().zip(&theta) {
        beta_hat[j] = *t;
    }
    Ok(EstimatorResult {
        beta_hat,
        support_hat: support,
        diagnostics: Diagnostics {
            iterations: k,
            objective: Some(norm2(&residual)),
            converged: true,
            wall_time_ms: elapsed_ms(start),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{assemble_instance, InstanceParams, SignalScheme};

    #[test]
    fn orthonormal_noiseless_exact_recovery() {
        let x = Matrix::identity(6);
        let beta = [0.0, 2.0, 0.0, -1.5, 0.0, 0.5];
        let r = matching_pursuit_omp(&x, &beta, 3).unwrap();
        assert_eq!(r.support_hat.as_slice(), &[1, 3, 5]);
        for (a, b) in r.beta_hat.iter().zip(&beta) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_response_takes_tie_break_indices() {
        let x = Matrix::from_fn(8, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + 0.1 * j as f64);
        let r = matching_pursuit_omp(&x, &[0.0; 8], 2).unwrap();
        assert_eq!(r.support_hat.as_slice(), &[0, 1]);
        assert!(r.beta_hat.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn first_step_is_largest_correlation() {
        let inst = assemble_instance(
            &InstanceParams {
                n: 60,
                n1: 0,
                p: 80,
                design: Default::default(),
                signal: SignalScheme::pm_one(3),
                sigma_e: 0.3,
            },
            9,
        )
        .unwrap();
        let corr = inst.x.tr_matvec(&inst.y);
        let arg = (0..corr.len())
            .max_by(|&a, &b| corr[a].abs().total_cmp(&corr[b].abs()).then(b.cmp(&a)))
            .unwrap();
        let r = matching_pursuit_omp(&inst.x, &inst.y, 1).unwrap();
        assert_eq!(r.support_hat.as_slice(), &[arg]);
    }

    #[test]
    fn recovers_clean_sparse_signal() {
        let inst = assemble_instance(
            &InstanceParams {
                n: 120,
                n1: 0,
                p: 200,
                design: Default::default(),
                signal: SignalScheme::pm_one(4),
                sigma_e: 0.1,
            },
            1,
        )
        .unwrap();
        let r = matching_pursuit_omp(&inst.x, &inst.y, 4).unwrap();
        assert_eq!(&r.support_hat, inst.truth.support());
    }
}
