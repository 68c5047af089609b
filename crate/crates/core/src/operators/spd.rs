use nalgebra::DMatrix;

use super::{LinearOperator, OperatorHandle};
use crate::error::{check_len, Error, Result};

/// Dense lower-triangular Cholesky factor `L` with `LLᵀ = A`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    // Row-major packed lower triangle: row i occupies i*(i+1)/2 .. +i+1.
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric matrix, reading only its lower triangle.
    ///
    /// Fails with [`Error::NotSpd`] on the first pivot that is not strictly
    /// positive.
    pub fn factor(a: &DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape {
                context: "cholesky",
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let n = a.nrows();
        let mut l = vec![0.0; n * (n + 1) / 2];
        let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
        for i in 0..n {
            for j in 0..=i {
                let ri = &l[idx(i, 0)..idx(i, 0) + j];
                let rj = &l[idx(j, 0)..idx(j, 0) + j];
                let s = a[(i, j)] - crate::vector::dot(ri, rj);
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotSpd { index: i, pivot: s });
                    }
                    l[idx(i, i)] = s.sqrt();
                } else {
                    l[idx(i, j)] = s / l[idx(j, j)];
                }
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.l[start..start + i + 1]
    }

    /// Overwrites `x` with `A⁻¹x` via a forward and a backward triangular solve.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let r = self.row(i);
            let s = crate::vector::dot(&r[..i], &x[..i]);
            x[i] = (x[i] - s) / r[i];
        }
        for i in (0..n).rev() {
            x[i] /= self.row(i)[i];
            let xi = x[i];
            let r = self.row(i);
            for (xj, lij) in x[..i].iter_mut().zip(&r[..i]) {
                *xj -= lij * xi;
            }
        }
    }

    /// The factor as a dense lower-triangular matrix.
    pub fn l(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if j <= i { self.row(i)[j] } else { 0.0 })
    }
}

/// `A⁻¹` for a dense SPD `A`, applied through its Cholesky factor.
#[derive(Debug, Clone)]
pub struct SpdInverse {
    factor: Cholesky,
}

impl SpdInverse {
    pub fn dim(&self) -> usize {
        self.factor.n
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }
}

impl LinearOperator for SpdInverse {
    fn nrows(&self) -> usize {
        self.factor.n
    }
    fn ncols(&self) -> usize {
        self.factor.n
    }
    fn gemv(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        if beta == 0.0 {
            y.copy_from_slice(x);
            self.factor.solve_in_place(y);
        } else {
            let mut t = x.to_vec();
            self.factor.solve_in_place(&mut t);
            for (yi, ti) in y.iter_mut().zip(t) {
                *yi = ti + beta * *yi;
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

impl From<SpdInverse> for OperatorHandle {
    fn from(inv: SpdInverse) -> Self {
        OperatorHandle::new(inv)
    }
}

/// Factors a dense SPD matrix and returns its inverse action.
///
/// The matrix must be symmetric to within `1e-12` relative to its largest
/// entry.
///
/// ```
/// use nalgebra::DMatrix;
/// use sqd_krylov::{spd_inverse_from_dense, DenseVector, OperatorHandle};
///
/// let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
/// let minv = OperatorHandle::from(spd_inverse_from_dense(&m)?);
/// let y = minv.apply(&DenseVector::new(vec![3.0, 3.0])?)?;
/// assert!((y[0] - 1.0).abs() < 1e-14 && (y[1] - 1.0).abs() < 1e-14);
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
pub fn spd_inverse_from_dense(m: &DMatrix<f64>) -> Result<SpdInverse> {
    check_len("spd_inverse_from_dense", m.nrows(), m.ncols())?;
    if m.nrows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if let Some(index) = m.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let scale = m.amax();
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    Ok(SpdInverse {
        factor: Cholesky::factor(m)?,
    })
}

// diag(d) + UUᵀ, or its inverse through Woodbury when `cap` holds the
// factor of I + UᵀD⁻¹U.
#[derive(Debug, Clone)]
struct LowRank {
    d: Vec<f64>,
    u: DMatrix<f64>,
    cap: Option<Cholesky>,
}

impl LowRank {
    // Uᵀx
    fn ut(&self, x: &[f64]) -> Vec<f64> {
        (0..self.u.ncols())
            .map(|j| self.u.column(j).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl LinearOperator for LowRank {
    fn nrows(&self) -> usize {
        self.d.len()
    }
    fn ncols(&self) -> usize {
        self.d.len()
    }
    fn gemv(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        let out: Vec<f64> = match &self.cap {
            None => {
                let t = self.ut(x);
                (0..x.len())
                    .map(|i| self.d[i] * x[i] + (0..t.len()).map(|j| self.u[(i, j)] * t[j]).sum::<f64>())
                    .collect()
            }
            Some(cap) => {
                // D⁻¹x − D⁻¹U (I + UᵀD⁻¹U)⁻¹ UᵀD⁻¹x
                let dx: Vec<f64> = x.iter().zip(&self.d).map(|(a, b)| a / b).collect();
                let mut t = self.ut(&dx);
                cap.solve_in_place(&mut t);
                (0..x.len())
                    .map(|i| dx[i] - (0..t.len()).map(|j| self.u[(i, j)] * t[j]).sum::<f64>() / self.d[i])
                    .collect()
            }
        };
        for (yi, o) in y.iter_mut().zip(out) {
            *yi = if beta == 0.0 { o } else { o + beta * *yi };
        }
    }
    fn gemv_adjoint(&self, x: &[f64], beta: f64, y: &mut [f64]) {
        self.gemv(x, beta, y)
    }
    fn is_symmetric(&self) -> bool {
        true
    }
}

/// How an [`SpdOperator`] was built; lets [`SpdOperator::shifted`] rebuild
/// the inverse exactly.
#[derive(Debug, Clone)]
pub enum SpdKind {
    Identity,
    Diagonal(Vec<f64>),
    Dense(DMatrix<f64>),
    /// `diag(d) + UUᵀ`
    LowRank { d: Vec<f64>, u: DMatrix<f64> },
    /// Supplied by the caller as an opaque forward/inverse pair.
    Custom,
}

/// An SPD matrix carried as a forward action together with its inverse.
///
/// The Krylov processes only ever apply the inverse. The forward action is
/// needed for explicit residuals and for the full-system baselines.
#[derive(Debug, Clone)]
pub struct SpdOperator {
    forward: OperatorHandle,
    inverse: OperatorHandle,
    kind: SpdKind,
}

impl SpdOperator {
    pub fn identity(n: usize) -> Self {
        Self {
            forward: OperatorHandle::identity(n),
            inverse: OperatorHandle::identity(n),
            kind: SpdKind::Identity,
        }
    }

    /// `diag(d)` with every `dᵢ > 0`.
    pub fn diagonal(d: Vec<f64>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::InvalidArgument("empty diagonal".into()));
        }
        if let Some(index) = d.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::NotSpd { index, pivot: d[index] });
        }
        let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
        Ok(Self {
            forward: OperatorHandle::diagonal(d.clone())?,
            inverse: OperatorHandle::diagonal(inv)?,
            kind: SpdKind::Diagonal(d),
        })
    }

    /// A dense SPD matrix; its inverse goes through [`spd_inverse_from_dense`].
    pub fn dense(m: DMatrix<f64>) -> Result<Self> {
        let inv = spd_inverse_from_dense(&m)?;
        Ok(Self {
            forward: OperatorHandle::from_dense(m.clone()),
            inverse: inv.into(),
            kind: SpdKind::Dense(m),
        })
    }

    /// `diag(d) + UUᵀ` with `d > 0` and `U` of size `n × r`.
    ///
    /// The inverse uses the Woodbury identity with an `r × r` Cholesky
    /// factorization of `I + UᵀD⁻¹U`, so nothing of size `n × n` is formed.
    ///
    /// ```
    /// use nalgebra::DMatrix;
    /// use sqd_krylov::{DenseVector, SpdOperator};
    ///
    /// let u = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
    /// let m = SpdOperator::diagonal_plus_low_rank(vec![1.0, 1.0], u)?;
    /// // [[2, 1], [1, 2]]⁻¹ (3, 3) = (1, 1)
    /// let y = m.inverse().apply(&DenseVector::new(vec![3.0, 3.0])?)?;
    /// assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
    /// # Ok::<(), sqd_krylov::Error>(())
    /// ```
    pub fn diagonal_plus_low_rank(d: Vec<f64>, u: DMatrix<f64>) -> Result<Self> {
        check_len("low-rank factor rows", d.len(), u.nrows())?;
        if d.is_empty() {
            return Err(Error::InvalidArgument("empty diagonal".into()));
        }
        if let Some(index) = d.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::NotSpd { index, pivot: d[index] });
        }
        if let Some(index) = u.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let r = u.ncols();
        let dinv_u = DMatrix::from_fn(u.nrows(), r, |i, j| u[(i, j)] / d[i]);
        let cap = Cholesky::factor(&(DMatrix::<f64>::identity(r, r) + u.transpose() * &dinv_u))?;
        let forward = LowRank {
            d: d.clone(),
            u: u.clone(),
            cap: None,
        };
        let inverse = LowRank {
            d: d.clone(),
            u: u.clone(),
            cap: Some(cap),
        };
        Ok(Self {
            forward: OperatorHandle::new(forward),
            inverse: OperatorHandle::new(inverse),
            kind: SpdKind::LowRank { d, u },
        })
    }

    /// Wraps caller-supplied actions. Nothing checks that they are inverse
    /// to each other.
    pub fn from_parts(forward: OperatorHandle, inverse: OperatorHandle) -> Result<Self> {
        let n = forward.nrows();
        for (ctx, op) in [("forward", &forward), ("inverse", &inverse)] {
            check_len(ctx, n, op.nrows())?;
            check_len(ctx, n, op.ncols())?;
        }
        Ok(Self {
            forward,
            inverse,
            kind: SpdKind::Custom,
        })
    }

    pub fn dim(&self) -> usize {
        self.forward.nrows()
    }

    pub fn forward(&self) -> &OperatorHandle {
        &self.forward
    }

    pub fn inverse(&self) -> &OperatorHandle {
        &self.inverse
    }

    pub fn kind(&self) -> &SpdKind {
        &self.kind
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, SpdKind::Identity)
    }

    /// `self + shift·I`, with the inverse rebuilt.
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        if !shift.is_finite() {
            return Err(Error::InvalidArgument(format!("shift {shift} is not finite")));
        }
        if shift == 0.0 {
            return Ok(self.clone());
        }
        match &self.kind {
            SpdKind::Identity => Self::diagonal(vec![1.0 + shift; self.dim()]),
            SpdKind::Diagonal(d) => Self::diagonal(d.iter().map(|v| v + shift).collect()),
            SpdKind::Dense(m) => {
                let n = m.nrows();
                Self::dense(m + DMatrix::<f64>::identity(n, n) * shift)
            }
            SpdKind::LowRank { d, u } => Self::diagonal_plus_low_rank(d.iter().map(|v| v + shift).collect(), u.clone()),
            SpdKind::Custom => Err(Error::InvalidArgument(
                "cannot shift a caller-supplied operator pair".into(),
            )),
        }
    }
}
