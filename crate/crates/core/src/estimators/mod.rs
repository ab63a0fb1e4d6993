//! Sparse regression estimators: the trimmed inner product and RoMP, plus the
//! baselines they are compared against (OMP, Lasso, Justice Pursuit and its
//! preprocessing variants, exhaustive search).

mod brute_force;
mod justice;
mod lasso;
mod omp;
mod romp;
mod trimmed;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use brute_force::{brute_force, BruteForceFit, DEFAULT_SIZE_GUARD};
pub use justice::{fill_matrix, fill_set, jp_fill, jp_row, justice_pursuit, row_discard, JpRowFit};
pub use lasso::{lasso, soft_threshold, CdFit, CdOptions, CdProblem};
pub use omp::matching_pursuit_omp;
pub use romp::{romp, romp_scores};
pub use trimmed::trimmed_inner_product;

use crate::error::{Error, Result};
use crate::model::SupportSet;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub objective: Option<f64>,
    pub converged: bool,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub beta_hat: Vec<f64>,
    pub support_hat: SupportSet,
    pub diagnostics: Diagnostics,
}

impl EstimatorResult {
    /// Wrap a dense estimate whose support is read off as its top-`k` entries.
    pub fn from_dense_top_k(beta_hat: Vec<f64>, k: usize, diagnostics: Diagnostics) -> Result<Self> {
        let support_hat = top_k_support(&beta_hat, k)?;
        Ok(Self {
            beta_hat,
            support_hat,
            diagnostics,
        })
    }
}

/// Indices of the `k` largest `|v_i|`; equal magnitudes go to the smaller index.
pub fn top_k_support(v: &[f64], k: usize) -> Result<SupportSet> {
    if k > v.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot select {k} entries from a vector of length {}",
            v.len()
        )));
    }
    if k == 0 {
        return Ok(SupportSet::empty());
    }
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let by_magnitude_desc =
        |a: &usize, b: &usize| v[*b].abs().total_cmp(&v[*a].abs()).then(a.cmp(b));
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, by_magnitude_desc);
        idx.truncate(k);
    }
    SupportSet::new(idx, v.len())
}

pub(crate) fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn top_k_examples() {
        assert_eq!(top_k_support(&[0.0, 5.0, -7.0, 1.0], 2).unwrap().as_slice(), &[1, 2]);
        assert_eq!(top_k_support(&[0.0; 6], 3).unwrap().as_slice(), &[0, 1, 2]);
        assert_eq!(top_k_support(&[1.0, -1.0, 1.0], 2).unwrap().as_slice(), &[0, 1]);
        assert!(top_k_support(&[1.0], 2).is_err());
        assert!(top_k_support(&[1.0], 0).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn top_k_matches_full_sort(
            v in proptest::collection::vec(-100i32..100, 1..40),
            k_frac in 0.0f64..=1.0,
        ) {
            let v: Vec<f64> = v.into_iter().map(f64::from).collect();
            let k = ((v.len() as f64) * k_frac).floor() as usize;
            let mut order: Vec<usize> = (0..v.len()).collect();
            order.sort_by(|&a, &b| v[b].abs().partial_cmp(&v[a].abs()).unwrap().then(a.cmp(&b)));
            let mut expected = order[..k].to_vec();
            expected.sort_unstable();
            let got = top_k_support(&v, k).unwrap();
            prop_assert_eq!(got.as_slice(), expected.as_slice());
        }
    }
}
