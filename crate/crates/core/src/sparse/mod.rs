//! Sparse and small-dense matrix primitives.
//!
//! [`SparseMatrix`] is a compressed-sparse-row real matrix. Every matrix in
//! the crate (the system matrix, the splitting pieces, the relaxation pair
//! and the bound matrix of the nonlinear map) is stored this way. Dense
//! arithmetic only appears in [`dense`], which is capped in size and serves
//! as an independent check.

mod classes;
pub mod dense;
mod spectral;
mod triangular;

use std::ops::Deref;

use crate::error::{Error, Result};

pub use classes::{
    is_h_matrix, is_m_matrix, is_monotone, ClassConfig, ClassMethod, MatrixClassReport,
};
pub use dense::{dense_inverse, dense_lu_solve, DenseLu, DENSE_LIMIT};
pub use spectral::{spectral_radius_nonneg, spectral_radius_of, LinearOperator, SpectralConfig};
pub use triangular::{lower_triangular_solve, lower_triangular_solve_into};

/// Compressed sparse row matrix of `f64`.
///
/// Column indices are strictly increasing inside each row. Constructors that
/// take triples sum duplicates and drop entries that end up exactly zero, so
/// two matrices built that way compare equal with `==` iff they are equal
/// entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, checking the structural
    /// invariants. Explicit zeros are kept.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::Dimension(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            )));
        }
        if row_offsets[0] != 0 || row_offsets[n_rows] != values.len() {
            return Err(Error::Dimension(
                "row_offsets must start at 0 and end at the number of values".into(),
            ));
        }
        if col_indices.len() != values.len() {
            return Err(Error::Dimension(
                "col_indices and values differ in length".into(),
            ));
        }
        for i in 0..n_rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::Dimension(format!("row_offsets decrease at row {i}")));
            }
            let cols = &col_indices[lo..hi];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Dimension(format!(
                    "column indices of row {i} are not strictly increasing"
                )));
            }
            if cols.last().is_some_and(|&c| c >= n_cols) {
                return Err(Error::Dimension(format!(
                    "column index out of range in row {i}"
                )));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from `(row, col, value)` triples. Duplicates are
    /// summed and exact zeros dropped.
    pub fn from_triplets<I>(n_rows: usize, n_cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        if let Some(&(i, j, _)) = entries
            .iter()
            .find(|&&(i, j, _)| i >= n_rows || j >= n_cols)
        {
            return Err(Error::Dimension(format!(
                "entry ({i}, {j}) outside a {n_rows}x{n_cols} matrix"
            )));
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut k = 0;
        while k < entries.len() {
            let (i, j, mut v) = entries[k];
            k += 1;
            while k < entries.len() && entries[k].0 == i && entries[k].1 == j {
                v += entries[k].2;
                k += 1;
            }
            if v != 0.0 {
                col_indices.push(j);
                values.push(v);
                row_offsets[i + 1] += 1;
            }
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from dense rows, dropping zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dimension("ragged dense rows".into()));
        }
        Self::from_triplets(
            n_rows,
            n_cols,
            rows.iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v))),
        )
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    /// Square diagonal matrix; zero diagonal entries are not stored.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
            .expect("diagonal entries are always in range")
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// All stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    /// The main diagonal, zero where nothing is stored.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, j, v) in self.iter() {
            out[i][j] = v;
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `y = self * x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "mul_vec: x has the wrong length");
        assert_eq!(y.len(), self.n_rows, "mul_vec: y has the wrong length");
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `y += self * x`.
    pub fn mul_vec_add(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "mul_vec: x has the wrong length");
        assert_eq!(y.len(), self.n_rows, "mul_vec: y has the wrong length");
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let s: f64 = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
            *yi += s;
        }
    }

    /// Same pattern, each value mapped through `f(row, col, value)`.
    pub fn map_entries(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n_rows {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            for k in lo..hi {
                out.values[k] = f(i, self.col_indices[k], self.values[k]);
            }
        }
        out
    }

    /// Keeps only the entries for which `keep(row, col, value)` holds.
    pub fn filter(&self, keep: impl Fn(usize, usize, f64) -> bool) -> Self {
        let mut row_offsets = vec![0usize; self.n_rows + 1];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if keep(i, j, v) {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets[i + 1] = values.len();
        }
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map_entries(|_, _, v| v * factor)
    }

    /// Entrywise `self - other` on the union pattern; exact zeros in the
    /// result are dropped.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Entrywise `self + other`; exact zeros in the result are dropped.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut row_offsets = vec![0usize; self.n_rows + 1];
        let mut col_indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(self.nnz().max(other.nnz()));
        let push = |cols: &mut Vec<usize>, vals: &mut Vec<f64>, j: usize, v: f64| {
            if v != 0.0 {
                cols.push(j);
                vals.push(v);
            }
        };
        for i in 0..self.n_rows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                if q == cb.len() || (p < ca.len() && ca[p] < cb[q]) {
                    push(&mut col_indices, &mut values, ca[p], op(va[p], 0.0));
                    p += 1;
                } else if p == ca.len() || cb[q] < ca[p] {
                    push(&mut col_indices, &mut values, cb[q], op(0.0, vb[q]));
                    q += 1;
                } else {
                    push(&mut col_indices, &mut values, ca[p], op(va[p], vb[q]));
                    p += 1;
                    q += 1;
                }
            }
            row_offsets[i + 1] = values.len();
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Entrywise equality where absent entries count as zero.
    pub fn equals_entrywise(&self, other: &Self) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.sub(other).is_ok_and(|d| d.nnz() == 0)
    }

    /// First strictly negative stored entry, if any.
    pub fn first_negative(&self) -> Option<(usize, usize, f64)> {
        self.iter().find(|&(_, _, v)| v < 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.first_negative().is_none()
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.iter().all(|(i, j, _)| j <= i)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n_rows)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.n_rows)
        } else {
            Err(Error::Dimension(format!(
                "{what} must be square, got {}x{}",
                self.n_rows, self.n_cols
            )))
        }
    }
}

/// Elementwise absolute value; same pattern.
pub fn abs_matrix(a: &SparseMatrix) -> SparseMatrix {
    a.map_entries(|_, _, v| v.abs())
}

/// Comparison matrix: `|a_ii|` on the diagonal, `-|a_ij|` elsewhere.
pub fn comparison_matrix(a: &SparseMatrix) -> Result<SparseMatrix> {
    a.require_square("comparison matrix input")?;
    Ok(a.map_entries(|i, j, v| if i == j { v.abs() } else { -v.abs() }))
}

/// A real vector whose entries are all finite.
///
/// Numeric routines take `&[f64]`; this type marks vectors that came from
/// outside (files, command line) and have been checked.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "vector entry {index} is not finite ({})",
                values[index]
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `max_i |x_i - y_i|`.
pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}
