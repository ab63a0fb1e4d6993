use std::time::Instant;

use super::{elapsed_ms, Diagnostics, EstimatorResult};
use crate::error::{Error, Result};
use crate::model::{least_squares, residual_norm, submatrix, Matrix, SupportSet};

pub const DEFAULT_SIZE_GUARD: u128 = 10_000_000;

/// Lexicographic k-subsets of `0..m`.
pub(crate) struct Combinations {
    idx: Vec<usize>,
    m: usize,
    first: bool,
}

impl Combinations {
    pub(crate) fn new(m: usize, k: usize) -> Self {
        Self {
            idx: (0..k).collect(),
            m,
            first: k <= m,
        }
    }

    /// Advance; returns `None` when exhausted.
    pub(crate) fn next_combination(&mut self) -> Option<&[usize]> {
        if self.first {
            self.first = false;
            return Some(&self.idx);
        }
        let k = self.idx.len();
        if k > self.m {
            return None;
        }
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.m + i - k {
                self.idx[i] += 1;
                for t in i + 1..k {
                    self.idx[t] = self.idx[t - 1] + 1;
                }
                return Some(&self.idx);
            }
        }
        None
    }
}

/// `C(m, k)`, saturating at `u128::MAX`.
pub(crate) fn binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul((m - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    c
}

#[derive(Clone, Debug)]
pub struct BruteForceFit {
    pub estimate: EstimatorResult,
    /// The selected row subset `Ŝ`.
    pub rows: Vec<usize>,
    /// Candidates skipped because their least-squares system was rank deficient.
    pub degenerate: usize,
}

/// Exhaustive search over row subsets of size `n` and column subsets of size
/// `k` for the smallest least-squares residual `‖y^S − X^S_Λ θ‖₂`.
///
/// Candidates are visited in lexicographic `(S, Λ)` order and only a strictly
/// smaller objective replaces the incumbent, so ties go to the first pair.
pub fn brute_force(
    x: &Matrix,
    y: &[f64],
    n: usize,
    k: usize,
    size_guard: u128,
) -> Result<BruteForceFit> {
    let start = Instant::now();
    let (rows, p) = (x.rows(), x.cols());
    if y.len() != rows {
        return Err(Error::DimensionMismatch(format!(
            "X has {rows} rows but y has {} entries",
            y.len()
        )));
    }
    if n > rows || k > p || n < k {
        return Err(Error::InvalidParameter(format!(
            "need k <= n <= rows and k <= p (n={n}, k={k}, rows={rows}, p={p})"
        )));
    }
    let count = binomial(rows, n).saturating_mul(binomial(p, k));
    if count > size_guard {
        return Err(Error::SizeGuardExceeded {
            count,
            guard: size_guard,
        });
    }

    let mut best: Option<(f64, Vec<usize>, Vec<usize>, Vec<f64>)> = None;
    let mut evaluated = 0;
    let mut degenerate = 0;
    let mut row_sets = Combinations::new(rows, n);
    while let Some(s) = row_sets.next_combination() {
        let s = s.to_vec();
        let ys: Vec<f64> = s.iter().map(|&i| y[i]).collect();
        let xs = x.select_rows(&s);
        let all: Vec<usize> = (0..n).collect();
        let mut col_sets = Combinations::new(p, k);
        while let Some(lam) = col_sets.next_combination() {
            evaluated += 1;
            let support = SupportSet::new(lam.to_vec(), p)?;
            let a = submatrix(&xs, &all, &support)?;
            let theta = match least_squares(&a, &ys) {
                Ok(t) => t,
                Err(Error::DegenerateSystem { .. }) => {
                    degenerate += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let obj = residual_norm(&a, &ys, &theta);
            if best.as_ref().is_none_or(|b| obj < b.0) {
                best = Some((obj, s.clone(), lam.to_vec(), theta));
            }
        }
    }

    let (objective, rows_hat, lam, theta) = best.ok_or(Error::DegenerateSystem {
        smallest: 0.0,
        threshold: 0.0,
    })?;
    let support_hat = SupportSet::new(lam, p)?;
    let mut beta_hat = vec![0.0; p];
    for (j, t) in support_hat.iter().zip(&theta) {
        beta_hat[j] = *t;
    }
    Ok(BruteForceFit {
        estimate: EstimatorResult {
            beta_hat,
            support_hat,
            diagnostics: Diagnostics {
                iterations: evaluated,
                objective: Some(objective),
                converged: true,
                wall_time_ms: elapsed_ms(start),
            },
        },
        rows: rows_hat,
        degenerate,
    })
}
