use nalgebra::DMatrix;

use super::LinearOperator;
use crate::error::{Error, Result};

/// Compressed sparse row storage.
///
/// The adjoint product is a row-scan scatter over the same arrays, so `Aᵀ`
/// is never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Validates and wraps raw CSR arrays. Column indices must be strictly
    /// increasing within each row.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidArgument(msg));
        if nrows == 0 || ncols == 0 {
            return invalid(format!("CSR dimensions must be positive, got {nrows}x{ncols}"));
        }
        if row_offsets.len() != nrows + 1 {
            return invalid(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            ));
        }
        if row_offsets[0] != 0 || row_offsets[nrows] != col_indices.len() {
            return invalid("row_offsets must start at 0 and end at nnz".into());
        }
        if col_indices.len() != values.len() {
            return invalid("col_indices and values differ in length".into());
        }
        for (i, w) in row_offsets.windows(2).enumerate() {
            if w[0] > w[1] {
                return invalid(format!("row_offsets decrease at row {i}"));
            }
            let cols = &col_indices[w[0]..w[1]];
            if cols.iter().any(|&j| j >= ncols) {
                return invalid(format!("column index out of range in row {i}"));
            }
            if cols.windows(2).any(|p| p[0] >= p[1]) {
                return invalid(format!("column indices not strictly increasing in row {i}"));
            }
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds from `(row, col, value)` triplets (0-based); duplicates are
    /// summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        for &(i, j, _) in &sorted {
            if i >= nrows || j >= ncols {
                return Err(Error::InvalidArgument(format!(
                    "triplet ({i}, {j}) outside {nrows}x{ncols}"
                )));
            }
        }
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(j);
                values.push(v);
                row_offsets[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self::new(nrows, ncols, row_offsets, col_indices, values)
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        let mut t = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of stored entries, explicit zeros included.
    pub fn nnz(&self) -> usize {
        self.values.len()
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

    /// Iterates over stored `(row, col, value)` entries in row order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.row_offsets[i]..self.row_offsets[i + 1])
                .map(move |p| (i, self.col_indices[p], self.values[p]))
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            out[(i, j)] += v;
        }
        out
    }

    /// Frobenius norm of the stored values; a cheap bound on `‖A‖₂`.
    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl LinearOperator for CsrMatrix {
    fn nrows(&self) -> usize {
        self.nrows
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn gemv(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            let mut s = 0.0;
            for (j, a) in self.col_indices[lo..hi].iter().zip(&self.values[lo..hi]) {
                s += a * x[*j];
            }
            *yi = if beta == 0.0 { s } else { s + beta * *yi };
        }
    }

    fn gemv_adjoint(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        super::scale_or_zero(beta, y);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            for (j, a) in self.col_indices[lo..hi].iter().zip(&self.values[lo..hi]) {
                y[*j] += a * xi;
            }
        }
    }
}
