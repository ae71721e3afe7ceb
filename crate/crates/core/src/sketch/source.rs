use std::borrow::Cow;

use crate::error::Result;
use crate::matcore::{DenseMatrix, IndexSet};

/// Read access to a data matrix by rows, columns or blocks.
///
/// The sketch builders only ever ask for the sampled rows, the sampled
/// columns and the core intersection, so a source backed by storage that
/// cannot hold the whole matrix in memory only needs to serve those.
pub trait MatrixSource {
    fn shape(&self) -> (usize, usize);

    /// `A^(rows, :)`.
    fn rows(&self, rows: &IndexSet) -> Result<Cow<'_, DenseMatrix>>;

    /// `A^(:, cols)`.
    fn cols(&self, cols: &IndexSet) -> Result<Cow<'_, DenseMatrix>>;

    /// `A^(rows, cols)`.
    fn block(&self, rows: &IndexSet, cols: &IndexSet) -> Result<Cow<'_, DenseMatrix>>;
}

impl MatrixSource for DenseMatrix {
    fn shape(&self) -> (usize, usize) {
        DenseMatrix::shape(self)
    }

    fn rows(&self, rows: &IndexSet) -> Result<Cow<'_, DenseMatrix>> {
        if rows.is_full() && rows.population() == self.nrows() {
            return Ok(Cow::Borrowed(self));
        }
        self.select_rows(rows).map(Cow::Owned)
    }

    fn cols(&self, cols: &IndexSet) -> Result<Cow<'_, DenseMatrix>> {
        if cols.is_full() && cols.population() == self.ncols() {
            return Ok(Cow::Borrowed(self));
        }
        self.select_cols(cols).map(Cow::Owned)
    }

    fn block(&self, rows: &IndexSet, cols: &IndexSet) -> Result<Cow<'_, DenseMatrix>> {
        let full_rows = rows.is_full() && rows.population() == self.nrows();
        let full_cols = cols.is_full() && cols.population() == self.ncols();
        match (full_rows, full_cols) {
            (true, true) => Ok(Cow::Borrowed(self)),
            (true, false) => self.select_cols(cols).map(Cow::Owned),
            (false, true) => self.select_rows(rows).map(Cow::Owned),
            (false, false) => self.submatrix(Some(rows), Some(cols)).map(Cow::Owned),
        }
    }
}
