//! Linear operators: the abstract interface plus sparse, dense, diagonal
//! and SPD-inverse backends.
//!
//! Every operator the solvers touch (`A`, `Aᵀ`, `M⁻¹`, `N⁻¹`, and the forward
//! `M`, `N` used by explicit residuals and the baselines) goes through an
//! [`OperatorHandle`].

mod csr;
mod spd;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

pub use csr::CsrMatrix;
pub use spd::{spd_inverse_from_dense, Cholesky, SpdInverse, SpdKind, SpdOperator};

use crate::error::{check_len, Result};
use crate::vector::DenseVector;

/// A real linear map `ℝⁿᶜᵒˡˢ → ℝⁿʳᵒʷˢ` with an adjoint.
///
/// Implementations write into caller-provided buffers. The accumulate form
/// `y ← op·x + beta·y` is part of the contract so the solvers can fold the
/// three-term recurrence into the product; `beta == 0.0` must overwrite `y`
/// without reading it.
pub trait LinearOperator: Send + Sync + fmt::Debug {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `y ← op·x + beta·y`, with `x.len() == ncols` and `y.len() == nrows`.
    fn gemv(&self, x: &[f64], beta: f64, y: &mut [f64]);

    /// `y ← opᵀ·x + beta·y`, with `x.len() == nrows` and `y.len() == ncols`.
    fn gemv_adjoint(&self, x: &[f64], beta: f64, y: &mut [f64]);

    fn is_symmetric(&self) -> bool {
        false
    }

    fn is_identity(&self) -> bool {
        false
    }
}

/// Shared, immutable handle to a [`LinearOperator`].
#[derive(Clone)]
pub struct OperatorHandle(Arc<dyn LinearOperator>);

impl fmt::Debug for OperatorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("OperatorHandle").field(&self.0).finish()
    }
}

impl OperatorHandle {
    pub fn new<T: LinearOperator + 'static>(op: T) -> Self {
        Self(Arc::new(op))
    }

    /// The zero-cost identity on `ℝⁿ`.
    pub fn identity(n: usize) -> Self {
        Self::new(Identity(n))
    }

    /// `diag(values)`. Entries must be finite.
    pub fn diagonal(values: Vec<f64>) -> Result<Self> {
        let d = DenseVector::new(values)?;
        Ok(Self::new(Diagonal(d.into_vec())))
    }

    pub fn from_csr(a: CsrMatrix) -> Self {
        Self::new(a)
    }

    pub fn from_dense(a: DMatrix<f64>) -> Self {
        Self::new(Dense(a))
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_symmetric(&self) -> bool {
        self.0.is_symmetric()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_identity()
    }

    /// `op·x`
    pub fn apply(&self, x: &DenseVector) -> Result<DenseVector> {
        check_len("apply", self.ncols(), x.len())?;
        let mut y = vec![0.0; self.nrows()];
        self.0.gemv(x, 0.0, &mut y);
        DenseVector::checked(y)
    }

    /// `opᵀ·y`
    pub fn apply_adjoint(&self, y: &DenseVector) -> Result<DenseVector> {
        check_len("apply_adjoint", self.nrows(), y.len())?;
        let mut x = vec![0.0; self.ncols()];
        self.0.gemv_adjoint(y, 0.0, &mut x);
        DenseVector::checked(x)
    }

    /// Checked `y ← op·x + beta·y` on raw buffers.
    pub fn gemv(&self, x: &[f64], beta: f64, y: &mut [f64]) -> Result<()> {
        check_len("gemv input", self.ncols(), x.len())?;
        check_len("gemv output", self.nrows(), y.len())?;
        self.0.gemv(x, beta, y);
        Ok(())
    }

    /// Checked `y ← opᵀ·x + beta·y` on raw buffers.
    pub fn gemv_adjoint(&self, x: &[f64], beta: f64, y: &mut [f64]) -> Result<()> {
        check_len("gemv_adjoint input", self.nrows(), x.len())?;
        check_len("gemv_adjoint output", self.ncols(), y.len())?;
        self.0.gemv_adjoint(x, beta, y);
        Ok(())
    }

    // Shapes are validated once when a problem is built; the inner loops use
    // these.
    #[inline]
    pub(crate) fn gemv_unchecked(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols());
        debug_assert_eq!(y.len(), self.nrows());
        self.0.gemv(x, beta, y);
    }

    #[inline]
    pub(crate) fn gemv_adjoint_unchecked(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows());
        debug_assert_eq!(y.len(), self.ncols());
        self.0.gemv_adjoint(x, beta, y);
    }

    /// Materializes the operator column by column. Meant for tests and
    /// small oracles.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (m, n) = (self.nrows(), self.ncols());
        let mut out = DMatrix::zeros(m, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; m];
        for j in 0..n {
            e[j] = 1.0;
            self.0.gemv(&e, 0.0, &mut col);
            out.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        out
    }
}

#[inline]
fn scale_or_zero(beta: f64, y: &mut [f64]) {
    if beta == 0.0 {
        y.fill(0.0);
    } else if beta != 1.0 {
        y.iter_mut().for_each(|v| *v *= beta);
    }
}

#[derive(Debug, Clone, Copy)]
struct Identity(usize);

impl LinearOperator for Identity {
    fn nrows(&self) -> usize {
        self.0
    }
    fn ncols(&self) -> usize {
        self.0
    }
    fn gemv(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        if beta == 0.0 {
            y.copy_from_slice(x);
        } else {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = xi + beta * *yi;
            }
        }
    }
    fn gemv_adjoint(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        self.gemv(x, beta, y)
    }
    fn is_symmetric(&self) -> bool {
        true
    }
    fn is_identity(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
struct Diagonal(Vec<f64>);

impl LinearOperator for Diagonal {
    fn nrows(&self) -> usize {
        self.0.len()
    }
    fn ncols(&self) -> usize {
        self.0.len()
    }
    fn gemv(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        if beta == 0.0 {
            for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.0) {
                *yi = di * xi;
            }
        } else {
            for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.0) {
                *yi = di * xi + beta * *yi;
            }
        }
    }
    fn gemv_adjoint(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        self.gemv(x, beta, y)
    }
    fn is_symmetric(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone)]
struct Dense(DMatrix<f64>);

impl LinearOperator for Dense {
    fn nrows(&self) -> usize {
        self.0.nrows()
    }
    fn ncols(&self) -> usize {
        self.0.ncols()
    }
    fn gemv(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        scale_or_zero(beta, y);
        // Column-major storage: accumulate column by column.
        for (j, col) in self.0.column_iter().enumerate() {
            let xj = x[j];
            if xj != 0.0 {
                for (yi, aij) in y.iter_mut().zip(col.iter()) {
                    *yi += aij * xj;
                }
            }
        }
    }
    fn gemv_adjoint(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        for (j, col) in self.0.column_iter().enumerate() {
            let s = crate::vector::dot(col.as_slice(), x);
            y[j] = if beta == 0.0 { s } else { s + beta * y[j] };
        }
    }
    fn is_symmetric(&self) -> bool {
        let a = &self.0;
        a.is_square() && (0..a.nrows()).all(|i| (0..i).all(|j| a[(i, j)] == a[(j, i)]))
    }
}
