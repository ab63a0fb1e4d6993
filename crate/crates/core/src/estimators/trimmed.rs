use crate::error::{Error, Result};

/// Inner product after discarding the `n1` coordinate products of largest magnitude.
///
/// Products are ranked by `(|a_i b_i|, i)`, so among equal magnitudes the larger
/// index is trimmed first. The kept products are summed in index order.
pub fn trimmed_inner_product(a: &[f64], b: &[f64], n1: usize) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "trimmed inner product of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if n1 > a.len() {
        return Err(Error::InvalidParameter(format!(
            "trimming {n1} of {} products",
            a.len()
        )));
    }
    let mut scratch = Vec::new();
    Ok(trimmed_dot(a, b, n1, &mut scratch))
}

/// Unchecked core; `scratch` is reused across calls to avoid reallocating.
pub(crate) fn trimmed_dot(a: &[f64], b: &[f64], n1: usize, scratch: &mut Vec<(f64, usize)>) -> f64 {
    let len = a.len();
    let keep = len - n1;
    if n1 == 0 {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    if keep == 0 {
        return 0.0;
    }
    scratch.clear();
    scratch.extend(a.iter().zip(b).enumerate().map(|(i, (x, y))| ((x * y).abs(), i)));
    let by_key = |l: &(f64, usize), r: &(f64, usize)| l.0.total_cmp(&r.0).then(l.1.cmp(&r.1));
    let (_, &mut (cut_mag, cut_idx), _) = scratch.select_nth_unstable_by(keep - 1, by_key);
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| {
            let q = x * y;
            let m = q.abs();
            if m < cut_mag || (m == cut_mag && i <= cut_idx) {
                q
            } else {
                0.0
            }
        })
        .sum()
}
