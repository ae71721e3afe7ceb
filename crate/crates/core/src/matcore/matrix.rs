//! Row-major dense matrices and index sets.
//!
//! Storage is `data[i * cols + j] = A[i, j]`. Products go through
//! `matrixmultiply::dgemm` with explicit strides, so transposed operands are
//! never materialized.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_arg, Error, Result};

/// A real, double precision, row-major matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row = &self.row(i)[..self.cols.min(8)];
            writeln!(f, "  {row:?}{}", if self.cols > 8 { " ..." } else { "" })?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    N,
    T,
}

impl DenseMatrix {
    /// Wraps row-major `data`. Rejects length mismatches and NaN/Inf entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        ensure_arg!(rows > 0 && cols > 0, "matrix dimensions must be positive, got {rows}x{cols}");
        ensure_arg!(data.len() == rows * cols, "data length {} does not match {rows}x{cols}", data.len());
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / cols, col: pos % cols });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        ensure_arg!(!rows.is_empty(), "at least one row required");
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            ensure_arg!(r.len() == cols, "row {i} has {} entries, expected {cols}", r.len());
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Zero-filled matrix. Zero dimensions are allowed here so that empty
    /// intermediate blocks can be represented.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// `rows x cols` matrix with `diag` on the main diagonal.
    pub fn from_diag(rows: usize, cols: usize, diag: &[f64]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &d) in diag.iter().enumerate().take(rows.min(cols)) {
            m.set(i, i, d);
        }
        m
    }

    /// Column vector.
    pub fn column_vector(values: &[f64]) -> Self {
        Self { rows: values.len(), cols: 1, data: values.to_vec() }
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Entries on the main diagonal.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                out.data[j * self.rows + i] = v;
            }
        }
        out
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|v| alpha * v).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, op: &'static str, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch { op, left: self.shape(), right: other.shape() });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    /// Scales column `j` by `factors[j]`.
    pub fn scale_columns(&self, factors: &[f64]) -> Self {
        debug_assert_eq!(factors.len(), self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for (v, f) in out.row_mut(i).iter_mut().zip(factors) {
                *v *= f;
            }
        }
        out
    }

    /// Copy of the columns in `range`.
    pub fn columns(&self, range: Range<usize>) -> Self {
        assert!(range.end <= self.cols, "column range {range:?} out of bounds for {} columns", self.cols);
        let width = range.len();
        let mut data = Vec::with_capacity(self.rows * width);
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[range.clone()]);
        }
        Self::from_raw(self.rows, width, data)
    }

    /// Copy of the rows in `range`.
    pub fn rows_range(&self, range: Range<usize>) -> Self {
        assert!(range.end <= self.rows, "row range {range:?} out of bounds for {} rows", self.rows);
        let data = self.data[range.start * self.cols..range.end * self.cols].to_vec();
        Self::from_raw(range.len(), self.cols, data)
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch { op: "hstack", left: self.shape(), right: other.shape() });
        }
        let mut data = Vec::with_capacity(self.rows * (self.cols + other.cols));
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(Self::from_raw(self.rows, self.cols + other.cols, data))
    }

    /// Gathers the rows listed in `set`, in index order.
    pub fn select_rows(&self, set: &IndexSet) -> Result<Self> {
        set.check_population(self.rows, "row")?;
        let mut data = Vec::with_capacity(set.len() * self.cols);
        for &i in set.as_slice() {
            data.extend_from_slice(self.row(i));
        }
        Ok(Self::from_raw(set.len(), self.cols, data))
    }

    /// Gathers the columns listed in `set`, in index order.
    pub fn select_cols(&self, set: &IndexSet) -> Result<Self> {
        set.check_population(self.cols, "column")?;
        let idx = set.as_slice();
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(idx.iter().map(|&j| row[j]));
        }
        Ok(Self::from_raw(self.rows, idx.len(), data))
    }

    /// `A^(rows, cols)`; `None` selects everything along that axis.
    pub fn submatrix(&self, rows: Option<&IndexSet>, cols: Option<&IndexSet>) -> Result<Self> {
        match (rows, cols) {
            (None, None) => Ok(self.clone()),
            (Some(r), None) => self.select_rows(r),
            (None, Some(c)) => self.select_cols(c),
            (Some(r), Some(c)) => {
                r.check_population(self.rows, "row")?;
                c.check_population(self.cols, "column")?;
                let mut data = Vec::with_capacity(r.len() * c.len());
                for &i in r.as_slice() {
                    let row = self.row(i);
                    data.extend(c.as_slice().iter().map(|&j| row[j]));
                }
                Ok(Self::from_raw(r.len(), c.len(), data))
            }
        }
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        gemm(self, Op::N, other, Op::N, "matmul")
    }

    /// `selfᵀ * other`.
    pub fn t_matmul(&self, other: &Self) -> Result<Self> {
        gemm(self, Op::T, other, Op::N, "t_matmul")
    }

    /// `self * otherᵀ`.
    pub fn matmul_t(&self, other: &Self) -> Result<Self> {
        gemm(self, Op::N, other, Op::T, "matmul_t")
    }

    /// `‖selfᵀ self − I‖_F`, the orthonormality defect of the columns.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.t_matmul(self).expect("gram shapes always agree");
        let mut acc = 0.0;
        for i in 0..gram.rows {
            for j in 0..gram.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                let d = gram.get(i, j) - target;
                acc += d * d;
            }
        }
        acc.sqrt()
    }
}

fn gemm(a: &DenseMatrix, op_a: Op, b: &DenseMatrix, op_b: Op, op: &'static str) -> Result<DenseMatrix> {
    let (m, ka, rsa, csa) = match op_a {
        Op::N => (a.rows, a.cols, a.cols as isize, 1isize),
        Op::T => (a.cols, a.rows, 1isize, a.cols as isize),
    };
    let (kb, n, rsb, csb) = match op_b {
        Op::N => (b.rows, b.cols, b.cols as isize, 1isize),
        Op::T => (b.cols, b.rows, 1isize, b.cols as isize),
    };
    if ka != kb {
        return Err(Error::DimensionMismatch { op, left: (m, ka), right: (kb, n) });
    }
    let mut c = DenseMatrix::zeros(m, n);
    if m == 0 || n == 0 || ka == 0 {
        return Ok(c);
    }
    // SAFETY: the pointers cover `m*k`, `k*n` and `m*n` elements addressed
    // through the strides computed above, which match each buffer's layout.
    unsafe {
        matrixmultiply::dgemm(
            m,
            ka,
            n,
            1.0,
            a.data.as_ptr(),
            rsa,
            csa,
            b.data.as_ptr(),
            rsb,
            csb,
            0.0,
            c.data.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    Ok(c)
}

/// A strictly increasing set of zero-based indices into `0..population`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    indices: Vec<usize>,
    population: usize,
}

impl IndexSet {
    /// Sorts and validates `indices`. Duplicates and out-of-range entries are rejected.
    pub fn new(mut indices: Vec<usize>, population: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("duplicate index {}", w[0])));
        }
        if let Some(&last) = indices.last() {
            ensure_arg!(last < population, "index {last} out of range for population {population}");
        }
        Ok(Self { indices, population })
    }

    /// `{0, 1, ..., population - 1}`.
    pub fn full(population: usize) -> Self {
        Self { indices: (0..population).collect(), population }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn population(&self) -> usize {
        self.population
    }

    pub fn is_full(&self) -> bool {
        self.indices.len() == self.population
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    fn check_population(&self, dim: usize, axis: &str) -> Result<()> {
        if let Some(&last) = self.indices.last() {
            ensure_arg!(last < dim, "{axis} index {last} out of range for dimension {dim}");
        }
        Ok(())
    }
}
