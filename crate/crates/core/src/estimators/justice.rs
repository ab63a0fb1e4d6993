//! Justice Pursuit and two magnitude-based preprocessing variants:
//! JP-fill clips the largest entries of `X` to a fixed magnitude, JP-row drops
//! the rows holding most of those entries.

use super::lasso::{CdFit, CdOptions, CdProblem};
use crate::error::{Error, Result};
use crate::model::Matrix;

pub fn justice_pursuit(x: &Matrix, y: &[f64], lambda: f64, gamma: f64) -> Result<CdFit> {
    CdProblem::new(x, y)?.solve(lambda, Some(gamma), None, &CdOptions::default())
}

/// Flat row-major indices (ascending) of the largest `n1/n` share of `|X|` entries,
/// where `n = rows − n1`. Equal magnitudes prefer the smaller flat index.
pub fn fill_set(x: &Matrix, n1: usize) -> Vec<usize> {
    let total = x.rows() * x.cols();
    if n1 == 0 || total == 0 {
        return Vec::new();
    }
    let count = if n1 >= x.rows() {
        total
    } else {
        let n = (x.rows() - n1) as f64;
        ((n1 as f64 / n) * total as f64).round().min(total as f64) as usize
    };
    if count == 0 {
        return Vec::new();
    }
    let v = x.as_slice();
    let mut idx: Vec<usize> = (0..total).collect();
    if count < total {
        idx.select_nth_unstable_by(count - 1, |&a, &b| {
            v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b))
        });
        idx.truncate(count);
    }
    idx.sort_unstable();
    idx
}

/// Copy of `x` with every entry of [`fill_set`] replaced by `sign · scale`.
pub fn fill_matrix(x: &Matrix, n1: usize, scale: f64) -> Matrix {
    let mut out = x.clone();
    let data = out.as_mut_slice();
    for i in fill_set(x, n1) {
        data[i] = data[i].signum() * scale * (data[i] != 0.0) as u8 as f64;
    }
    out
}

/// Rows kept by JP-row: drop the `n1` rows holding the most [`fill_set`]
/// entries (ties drop the smaller row index), return the rest ascending.
pub fn row_discard(x: &Matrix, n1: usize) -> Result<Vec<usize>> {
    if n1 >= x.rows() && x.rows() > 0 {
        return Err(Error::InvalidParameter(format!(
            "cannot discard {n1} of {} rows",
            x.rows()
        )));
    }
    let mut counts = vec![0usize; x.rows()];
    for i in fill_set(x, n1) {
        counts[i / x.cols()] += 1;
    }
    let mut order: Vec<usize> = (0..x.rows()).collect();
    order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
    let mut kept = order.split_off(n1);
    kept.sort_unstable();
    Ok(kept)
}

pub fn jp_fill(x: &Matrix, y: &[f64], n1: usize, lambda: f64, gamma: f64) -> Result<CdFit> {
    justice_pursuit(&fill_matrix(x, n1, 1.0), y, lambda, gamma)
}

#[derive(Clone, Debug)]
pub struct JpRowFit {
    pub fit: CdFit,
    /// Rows that were kept; `fit.z` is indexed by position in this list.
    pub kept_rows: Vec<usize>,
}

pub fn jp_row(x: &Matrix, y: &[f64], n1: usize, lambda: f64, gamma: f64) -> Result<JpRowFit> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} rows but y has {} entries",
            x.rows(),
            y.len()
        )));
    }
    let kept_rows = row_discard(x, n1)?;
    let xs = x.select_rows(&kept_rows);
    let ys: Vec<f64> = kept_rows.iter().map(|&i| y[i]).collect();
    let fit = justice_pursuit(&xs, &ys, lambda, gamma)?;
    Ok(JpRowFit { fit, kept_rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{assemble_instance, InstanceParams, SignalScheme};
    use crate::estimators::lasso::{lasso, soft_threshold};
    use crate::estimators::top_k_support;
    use crate::model::{norm2, Matrix};

    fn instance(seed: u64) -> (Matrix, Vec<f64>) {
        let inst = assemble_instance(
            &InstanceParams {
                n: 40,
                n1: 4,
                p: 60,
                design: Default::default(),
                signal: SignalScheme::pm_one(3),
                sigma_e: 0.5,
            },
            seed,
        )
        .unwrap();
        (inst.x, inst.y)
    }

    #[test]
    fn huge_gamma_reduces_to_lasso() {
        let (x, y) = instance(1);
        let gamma = 1.01 * norm2(&y);
        let jp = justice_pursuit(&x, &y, 0.05, gamma).unwrap();
        let l = lasso(&x, &y, 0.05).unwrap();
        assert!(jp.z.iter().all(|&z| z == 0.0));
        for (a, b) in jp.beta.iter().zip(&l.beta) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_design_soft_thresholds_the_response() {
        let y = [2.0, -0.5, 1.2, -3.0];
        let fit = justice_pursuit(&Matrix::zeros(4, 3), &y, 0.1, 1.0).unwrap();
        assert!(fit.beta.iter().all(|&b| b == 0.0));
        for (z, yi) in fit.z.iter().zip(&y) {
            assert_eq!(*z, soft_threshold(-yi, 1.0));
        }
    }

    #[test]
    fn huge_lambda_leaves_only_z() {
        let (x, y) = instance(2);
        let lambda = 1e6;
        let fit = justice_pursuit(&x, &y, lambda, 0.05).unwrap();
        assert!(fit.beta.iter().all(|&b| b == 0.0));
        for (z, yi) in fit.z.iter().zip(&y) {
            assert!((z - soft_threshold(-yi, 0.05)).abs() < 1e-15);
        }
    }

    #[test]
    fn objective_never_increases() {
        let (x, y) = instance(3);
        let fit = justice_pursuit(&x, &y, 0.02, 0.05).unwrap();
        for w in fit.trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-14));
        }
    }

    #[test]
    fn kkt_for_beta_and_z() {
        let (x, y) = instance(4);
        let (lambda, gamma) = (0.02, 0.05);
        let fit = justice_pursuit(&x, &y, lambda, gamma).unwrap();
        let xb = x.matvec(&fit.beta);
        let r: Vec<f64> = (0..y.len()).map(|i| y[i] + fit.z[i] - xb[i]).collect();
        let g = x.tr_matvec(&r);
        for (gj, b) in g.iter().zip(&fit.beta) {
            if *b == 0.0 {
                assert!(gj.abs() <= lambda + 1e-6);
            } else {
                assert!((gj - lambda * b.signum()).abs() <= 1e-6);
            }
        }
        for (ri, zi) in r.iter().zip(&fit.z) {
            // Stationarity in z_i: 0 ∈ r_i + γ ∂|z_i|.
            if *zi == 0.0 {
                assert!(ri.abs() <= gamma + 1e-12);
            } else {
                assert!((ri + gamma * zi.signum()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn rescaling_the_design_keeps_the_support() {
        let (x, y) = instance(5);
        let (lambda, gamma, c) = (0.03, 0.04, 2.5);
        let a = justice_pursuit(&x, &y, lambda, gamma).unwrap();
        let b = justice_pursuit(&x.scaled(c), &y, c * lambda, gamma).unwrap();
        assert_eq!(top_k_support(&a.beta, 3).unwrap(), top_k_support(&b.beta, 3).unwrap());
        for (u, v) in a.beta.iter().zip(&b.beta) {
            assert!((u - c * v).abs() < 1e-5);
        }
    }

    #[test]
    fn unit_magnitude_design_is_unchanged_by_fill() {
        let x = Matrix::from_fn(12, 8, |i, j| if (i * 5 + j * 3) % 7 < 3 { -1.0 } else { 1.0 });
        let y: Vec<f64> = (0..12).map(|i| (i as f64).cos()).collect();
        assert_eq!(fill_matrix(&x, 2, 1.0), x);
        let a = jp_fill(&x, &y, 2, 0.1, 0.2).unwrap();
        let b = justice_pursuit(&x, &y, 0.1, 0.2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn no_budget_means_no_preprocessing() {
        let (x, y) = instance(6);
        let plain = justice_pursuit(&x, &y, 0.02, 0.05).unwrap();
        assert!(fill_set(&x, 0).is_empty());
        assert_eq!(jp_fill(&x, &y, 0, 0.02, 0.05).unwrap(), plain);
        let row = jp_row(&x, &y, 0, 0.02, 0.05).unwrap();
        assert_eq!(row.fit, plain);
        assert_eq!(row.kept_rows.len(), x.rows());
    }

    #[test]
    fn fill_set_size_and_order() {
        // 4 rows, n1 = 1 => n = 3, share 1/3 of 8 entries rounds to 3.
        let x = Matrix::from_rows(&[
            vec![1.0, -9.0],
            vec![2.0, 3.0],
            vec![-3.0, 0.5],
            vec![0.1, 8.0],
        ])
        .unwrap();
        // |3| appears at flat 3 and 4; the smaller index wins.
        assert_eq!(fill_set(&x, 1), vec![1, 3, 7]);
        let filled = fill_matrix(&x, 1, 1.0);
        assert_eq!(filled.get(0, 1), -1.0);
        assert_eq!(filled.get(3, 1), 1.0);
        assert_eq!(filled.get(1, 1), 1.0);
        assert_eq!(filled.get(2, 0), -3.0);
    }

    #[test]
    fn huge_row_is_discarded() {
        let (mut x, y) = instance(7);
        for v in x.row_mut(13) {
            *v = 1e3;
        }
        let fit = jp_row(&x, &y, 4, 0.02, 0.05).unwrap();
        assert!(!fit.kept_rows.contains(&13));
        assert_eq!(fit.kept_rows.len(), x.rows() - 4);
        assert_eq!(fit.fit.z.len(), x.rows() - 4);
    }

    #[test]
    fn discarding_every_row_is_rejected() {
        let (x, y) = instance(8);
        assert!(jp_row(&x, &y, x.rows(), 0.1, 0.1).is_err());
    }
}
