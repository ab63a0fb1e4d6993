use std::time::Instant;

use rayon::prelude::*;

use super::trimmed::trimmed_dot;
use super::{elapsed_ms, top_k_support, Diagnostics, EstimatorResult};
use crate::error::{Error, Result};
use crate::model::Matrix;

/// Trimmed inner product `h(j)` of `y` with every column of `x`.
///
/// Columns are scored in parallel; the output is in column order and does not
/// depend on the thread count.
pub fn romp_scores(x: &Matrix, y: &[f64], n1: usize) -> Result<Vec<f64>> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} rows but y has {} entries",
            x.rows(),
            y.len()
        )));
    }
    if n1 > y.len() {
        return Err(Error::InvalidParameter(format!(
            "trimming budget {n1} exceeds {} rows",
            y.len()
        )));
    }
    Ok(x.columns()
        .par_iter()
        .map_init(Vec::new, |scratch, col| trimmed_dot(y, col, n1, scratch))
        .collect())
}

/// Robust matching pursuit: keep the `k` columns with largest `|h(j)|` and use
/// `h(j)` itself as the coefficient. One pass, no refitting.
pub fn romp(x: &Matrix, y: &[f64], k: usize, n1: usize) -> Result<EstimatorResult> {
    let start = Instant::now();
    if k > x.cols() {
        return Err(Error::InvalidParameter(format!(
            "sparsity {k} exceeds {} columns",
            x.cols()
        )));
    }
    let h = romp_scores(x, y, n1)?;
    let support_hat = top_k_support(&h, k)?;
    let mut beta_hat = vec![0.0; x.cols()];
    for j in support_hat.iter() {
        beta_hat[j] = h[j];
    }
    Ok(EstimatorResult {
        beta_hat,
        support_hat,
        diagnostics: Diagnostics {
            iterations: 1,
            objective: None,
            converged: true,
            wall_time_ms: elapsed_ms(start),
        },
    })
}
