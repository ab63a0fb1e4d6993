//! Dense numeric data model shared by every other module.
//!
//! Matrices are row-major `f64`. Vectors are plain `Vec<f64>` / `&[f64]`.
//! Column access copies.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative singular-value cutoff below which a system is treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Build from a function of `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// All columns, each copied out once. Column-major access pattern for solvers.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::with_capacity(self.rows); self.cols];
        for i in 0..self.rows {
            for (col, &v) in out.iter_mut().zip(self.row(i)) {
                col.push(v);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `X v`.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `Xᵀ v`.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(self.row(i)) {
                *o += x * vi;
            }
        }
        out
    }

    /// Keep the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix({}x{}) ", self.rows, self.cols)?;
        f.debug_list()
            .entries((0..self.rows.min(8)).map(|i| self.row(i)))
            .finish()
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            seq.serialize_element(self.row(i))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Matrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Sorted set of distinct column indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    /// Sorts `indices`; rejects duplicates and indices `>= p`.
    pub fn new(mut indices: Vec<usize>, p: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "duplicate support index {}",
                w[0]
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= p {
                return Err(Error::IndexOutOfRange {
                    what: "support",
                    index: last,
                    len: p,
                });
            }
        }
        Ok(Self(indices))
    }

    /// `{0, 1, ..., n-1}`.
    pub fn range(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn intersection_count(&self, other: &SupportSet) -> usize {
        self.iter().filter(|&j| other.contains(j)).count()
    }

    pub fn is_disjoint(&self, other: &SupportSet) -> bool {
        self.intersection_count(other) == 0
    }

    /// Indices in `[0, p)` not in the set, ascending.
    pub fn complement(&self, p: usize) -> Vec<usize> {
        (0..p).filter(|&j| !self.contains(j)).collect()
    }
}

impl<'de> Deserialize<'de> for SupportSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return Err(D::Error::custom(
                "support indices must be strictly increasing",
            ));
        }
        Ok(Self(v))
    }
}

/// A k-sparse vector in dimension `p` with explicit support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    p: usize,
    support: SupportSet,
    values: Vec<f64>,
}

impl SparseSignal {
    pub fn new(p: usize, support: SupportSet, values: Vec<f64>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "support has {} indices but {} values",
                support.len(),
                values.len()
            )));
        }
        if let Some(&last) = support.as_slice().last() {
            if last >= p {
                return Err(Error::IndexOutOfRange {
                    what: "signal",
                    index: last,
                    len: p,
                });
            }
        }
        if values.iter().any(|&v| v == 0.0 || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "sparse signal values must be finite and nonzero".into(),
            ));
        }
        Ok(Self { p, support, values })
    }

    /// Keep the nonzero entries of a dense vector.
    pub fn from_dense(v: &[f64]) -> Self {
        let (support, values): (Vec<usize>, Vec<f64>) = v
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(i, &x)| (i, x))
            .unzip();
        Self {
            p: v.len(),
            support: SupportSet(support),
            values,
        }
    }

    pub fn dimension(&self) -> usize {
        self.p
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        for (j, &v) in self.support.iter().zip(&self.values) {
            out[j] = v;
        }
        out
    }

    pub fn norm1(&self) -> f64 {
        norm1(&self.values)
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.values)
    }
}

/// Free-function form of [`SparseSignal::dense`].
pub fn dense_expand(s: &SparseSignal) -> Vec<f64> {
    s.dense()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionModel {
    None,
    Row,
    Distributed,
}

/// One cell of the data: a covariate `(row, col)` or the response at `row` (`col = None`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: Option<usize>,
}

impl Cell {
    pub fn covariate(row: usize, col: usize) -> Self {
        Self {
            row,
            col: Some(col),
        }
    }

    pub fn response(row: usize) -> Self {
        Self { row, col: None }
    }
}

/// Record of which cells an adversary wrote.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorruptionLedger {
    pub model: CorruptionModel,
    pub budget: usize,
    pub touched: BTreeSet<Cell>,
    pub attack: String,
}

impl CorruptionLedger {
    pub fn clean() -> Self {
        Self {
            model: CorruptionModel::None,
            budget: 0,
            touched: BTreeSet::new(),
            attack: "none".into(),
        }
    }

    pub fn new(model: CorruptionModel, budget: usize, attack: &str) -> Self {
        Self {
            model,
            budget,
            touched: BTreeSet::new(),
            attack: attack.into(),
        }
    }

    /// Mark a whole row (all `p` covariates and the response).
    pub fn mark_row(&mut self, row: usize, p: usize) {
        self.touched.insert(Cell::response(row));
        for j in 0..p {
            self.touched.insert(Cell::covariate(row, j));
        }
    }

    pub fn touched_rows(&self) -> BTreeSet<usize> {
        self.touched.iter().map(|c| c.row).collect()
    }

    /// Touched-cell count per column; index `p` holds the response count.
    pub fn per_column_counts(&self, p: usize) -> Vec<usize> {
        let mut counts = vec![0; p + 1];
        for c in &self.touched {
            counts[c.col.unwrap_or(p)] += 1;
        }
        counts
    }

    /// Whether the touched cells respect the declared model and budget.
    pub fn within_budget(&self, p: usize) -> bool {
        match self.model {
            CorruptionModel::None => self.touched.is_empty(),
            CorruptionModel::Row => self.touched_rows().len() <= self.budget,
            CorruptionModel::Distributed => self
                .per_column_counts(p)
                .into_iter()
                .all(|c| c <= self.budget),
        }
    }
}

/// Covariates, responses, ground truth and corruption bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionInstance {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub truth: SparseSignal,
    pub noise_sigma: f64,
    /// Sorted indices of the `n` authentic rows; the rest form the outlier set.
    pub authentic_rows: Vec<usize>,
    pub ledger: CorruptionLedger,
}

impl RegressionInstance {
    pub fn total_rows(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn k(&self) -> usize {
        self.truth.sparsity()
    }

    /// Number of authentic rows.
    pub fn n(&self) -> usize {
        self.authentic_rows.len()
    }

    pub fn n_outliers(&self) -> usize {
        self.total_rows() - self.n()
    }

    /// Sorted indices of the rows outside the authentic set.
    pub fn outlier_rows(&self) -> Vec<usize> {
        let mut is_auth = vec![false; self.total_rows()];
        for &i in &self.authentic_rows {
            is_auth[i] = true;
        }
        (0..self.total_rows()).filter(|&i| !is_auth[i]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.y.len() != self.x.rows() {
            return Err(Error::DimensionMismatch(format!(
                "X has {} rows but y has {} entries",
                self.x.rows(),
                self.y.len()
            )));
        }
        if self.truth.dimension() != self.x.cols() {
            return Err(Error::DimensionMismatch(format!(
                "X has {} columns but signal dimension is {}",
                self.x.cols(),
                self.truth.dimension()
            )));
        }
        if !self.x.is_finite() || self.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("instance has non-finite entries".into()));
        }
        if self.authentic_rows.windows(2).any(|w| w[0] >= w[1])
            || self.authentic_rows.last().is_some_and(|&i| i >= self.x.rows())
        {
            return Err(Error::InvalidParameter(
                "authentic rows must be sorted, distinct and in range".into(),
            ));
        }
        if !self.ledger.within_budget(self.p()) {
            return Err(Error::InvalidParameter(
                "ledger exceeds its corruption budget".into(),
            ));
        }
        Ok(())
    }
}

/// `X^S_Λ`: rows `S` in ascending order, columns in support order.
pub fn submatrix(x: &Matrix, rows: &[usize], cols: &SupportSet) -> Result<Matrix> {
    let mut rows = rows.to_vec();
    rows.sort_unstable();
    rows.dedup();
    if let Some(&r) = rows.last() {
        if r >= x.rows() {
            return Err(Error::IndexOutOfRange {
                what: "rows",
                index: r,
                len: x.rows(),
            });
        }
    }
    if let Some(&c) = cols.as_slice().last() {
        if c >= x.cols() {
            return Err(Error::IndexOutOfRange {
                what: "columns",
                index: c,
                len: x.cols(),
            });
        }
    }
    let mut data = Vec::with_capacity(rows.len() * cols.len());
    for &i in &rows {
        let r = x.row(i);
        data.extend(cols.iter().map(|j| r[j]));
    }
    Matrix::new(rows.len(), cols.len(), data)
}

/// `argmin_θ ‖b − Aθ‖₂` via singular value decomposition.
///
/// Fails with [`Error::DegenerateSystem`] when the smallest singular value is
/// below `RANK_TOLERANCE` times the largest.
pub fn least_squares(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, q) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "A has {m} rows but b has {} entries",
            b.len()
        )));
    }
    if q == 0 {
        return Ok(Vec::new());
    }
    if m < q {
        return Err(Error::InvalidParameter(format!(
            "least squares needs at least as many rows as columns ({m} < {q})"
        )));
    }
    let am = DMatrix::from_row_slice(m, q, a.as_slice());
    let svd = am.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let threshold = RANK_TOLERANCE * smax;
    if !(smax > 0.0) || smin < threshold {
        return Err(Error::DegenerateSystem {
            smallest: smin,
            threshold,
        });
    }
    let bv = DVector::from_column_slice(b);
    let theta = svd
        .solve(&bv, 0.0)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(theta.iter().copied().collect())
}

/// `‖b − Aθ‖₂`.
pub fn residual_norm(a: &Matrix, b: &[f64], theta: &[f64]) -> f64 {
    let fit = a.matvec(theta);
    b.iter()
        .zip(&fit)
        .map(|(bi, fi)| (bi - fi).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn submatrix_identity_and_index_arithmetic() {
        let eye = Matrix::identity(2);
        let all = SupportSet::range(2);
        assert_eq!(submatrix(&eye, &[0, 1], &all).unwrap(), eye);

        let x = Matrix::from_fn(3, 3, |i, j| (3 * i + j) as f64);
        let s = submatrix(&x, &[2, 0], &SupportSet::new(vec![1], 3).unwrap()).unwrap();
        assert_eq!(s.rows(), 2);
        assert_eq!(s.as_slice(), &[1.0, 7.0]);
    }

    #[test]
    fn submatrix_empty_rows_and_out_of_range() {
        let x = Matrix::identity(3);
        let lam = SupportSet::new(vec![0, 2], 3).unwrap();
        let s = submatrix(&x, &[], &lam).unwrap();
        assert_eq!((s.rows(), s.cols()), (0, 2));
        assert!(matches!(
            submatrix(&x, &[3], &lam),
            Err(Error::IndexOutOfRange { .. })
        ));
        let wide = SupportSet::new(vec![5], 6).unwrap();
        assert!(submatrix(&x, &[0], &wide).is_err());
    }

    #[test]
    fn dense_expand_examples() {
        let s = SparseSignal::new(4, SupportSet::new(vec![1], 4).unwrap(), vec![5.0]).unwrap();
        assert_eq!(dense_expand(&s), vec![0.0, 5.0, 0.0, 0.0]);
        let s = SparseSignal::new(3, SupportSet::empty(), vec![]).unwrap();
        assert_eq!(dense_expand(&s), vec![0.0; 3]);
        let s = SparseSignal::new(5, SupportSet::new(vec![0, 4], 5).unwrap(), vec![1.0, -1.0])
            .unwrap();
        assert_eq!(dense_expand(&s), vec![1.0, 0.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn sparse_signal_rejects_zero_values() {
        let sup = SupportSet::new(vec![0], 2).unwrap();
        assert!(SparseSignal::new(2, sup, vec![0.0]).is_err());
    }

    #[test]
    fn support_set_validation() {
        assert!(SupportSet::new(vec![1, 1], 3).is_err());
        assert!(SupportSet::new(vec![3], 3).is_err());
        assert_eq!(SupportSet::new(vec![2, 0], 3).unwrap().as_slice(), &[0, 2]);
        let json = serde_json::to_string(&SupportSet::range(3)).unwrap();
        assert_eq!(json, "[0,1,2]");
        assert!(serde_json::from_str::<SupportSet>("[2,1]").is_err());
    }

    #[test]
    fn least_squares_examples() {
        let b = vec![3.0, -1.5, 2.25];
        let theta = least_squares(&Matrix::identity(3), &b).unwrap();
        for (t, e) in theta.iter().zip(&b) {
            assert!((t - e).abs() < 1e-12);
        }

        let a = Matrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        let theta = least_squares(&a, &[1.0, 3.0]).unwrap();
        assert!((theta[0] - 2.0).abs() < 1e-12);

        let a = Matrix::new(3, 2, vec![1.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let theta = least_squares(&a, &[1.0, 1.0, 2.0]).unwrap();
        assert!((theta[0] - 1.0).abs() < 1e-12 && (theta[1] - 1.0).abs() < 1e-12);
        assert!(residual_norm(&a, &[1.0, 1.0, 2.0], &theta) < 1e-12);
    }

    #[test]
    fn least_squares_rejects_rank_deficiency() {
        let a = Matrix::new(3, 2, vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0]).unwrap();
        assert!(matches!(
            least_squares(&a, &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateSystem { .. })
        ));
        assert!(least_squares(&Matrix::zeros(2, 1), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn matrix_json_is_nested_arrays() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 0.1 + 0.2]]).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, "[[1.0,2.0],[3.0,0.30000000000000004]]");
        let back: Matrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<Matrix>("[[1.0],[1.0,2.0]]").is_err());
    }

    proptest! {
        #[test]
        fn submatrix_of_everything_is_identity_map(
            rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()
        ) {
            let x = Matrix::from_fn(rows, cols, |i, j| ((seed >> ((i * cols + j) % 60)) & 0xff) as f64 - 100.0);
            let all_rows: Vec<usize> = (0..rows).collect();
            prop_assert_eq!(submatrix(&x, &all_rows, &SupportSet::range(cols)).unwrap(), x);
        }

        #[test]
        fn sparsify_then_expand_is_identity(v in proptest::collection::vec(
            prop_oneof![Just(0.0), -10.0f64..10.0], 0..20)
        ) {
            let s = SparseSignal::from_dense(&v);
            prop_assert_eq!(s.dense(), v.clone());
            prop_assert_eq!(SparseSignal::from_dense(&s.dense()), s);
        }

        #[test]
        fn least_squares_beats_random_candidates(
            vals in proptest::collection::vec(-5.0f64..5.0, 12),
            b in proptest::collection::vec(-5.0f64..5.0, 4),
            cand in proptest::collection::vec(-5.0f64..5.0, 3),
        ) {
            let a = Matrix::new(4, 3, vals).unwrap();
            if let Ok(theta) = least_squares(&a, &b) {
                let best = residual_norm(&a, &b, &theta);
                prop_assert!(best <= residual_norm(&a, &b, &cand) + 1e-8);
                // Residual is orthogonal to the column space.
                let fit = a.matvec(&theta);
                let r: Vec<f64> = b.iter().zip(&fit).map(|(x, y)| x - y).collect();
                let g = a.tr_matvec(&r);
                let scale = 1.0 + norm2(&b) * a.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                prop_assert!(norm2(&g) <= 1e-8 * scale);
            }
        }
    }
}
