//! The block system
//!
//! ```text
//! [ τM   A  ] [x]   [b]
//! [ Aᵀ   νN ] [y] = [c]
//! ```
//!
//! together with solver options and the shared stopping rule.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::operators::{OperatorHandle, SpdOperator};
use crate::vector::{dot, DenseVector};

/// A sign flag for one diagonal block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Zero,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Zero => 0.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Zero => 0,
            Sign::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            0 => Ok(Sign::Zero),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::InvalidArgument(format!("sign must be 1, 0 or -1, got {v}"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

/// Preconditioner slot: the inverse action is mandatory, the forward action
/// optional.
#[derive(Debug, Clone)]
struct Block {
    inverse: OperatorHandle,
    forward: Option<OperatorHandle>,
}

impl Block {
    fn identity(n: usize) -> Self {
        Self {
            inverse: OperatorHandle::identity(n),
            forward: Some(OperatorHandle::identity(n)),
        }
    }
}

/// An SQD (or generalized-sign) system with its preconditioners.
///
/// Defaults to `M = N = I`, `τ = +1`, `ν = −1`.
///
/// ```
/// use sqd_krylov::{CsrMatrix, DenseVector, OperatorHandle, SqdProblem};
///
/// let a = CsrMatrix::from_triplets(2, 1, &[(0, 0, 1.0), (1, 0, 2.0)])?;
/// let b = DenseVector::new(vec![1.0, 0.0])?;
/// let c = DenseVector::new(vec![1.0])?;
/// let problem = SqdProblem::new(OperatorHandle::from_csr(a), b, c)?;
/// assert_eq!(problem.dims(), (2, 1));
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
#[derive(Debug, Clone)]
pub struct SqdProblem {
    a: OperatorHandle,
    m: Block,
    n: Block,
    b: DenseVector,
    c: DenseVector,
    tau: Sign,
    nu: Sign,
}

impl SqdProblem {
    pub fn new(a: OperatorHandle, b: DenseVector, c: DenseVector) -> Result<Self> {
        check_len("right-hand side b", a.nrows(), b.len())?;
        check_len("right-hand side c", a.ncols(), c.len())?;
        let (m, n) = (a.nrows(), a.ncols());
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("A must have positive dimensions".into()));
        }
        Ok(Self {
            a,
            m: Block::identity(m),
            n: Block::identity(n),
            b,
            c,
            tau: Sign::Plus,
            nu: Sign::Minus,
        })
    }

    /// Installs SPD `M` and `N`, both forward and inverse.
    pub fn with_preconditioners(mut self, m: &SpdOperator, n: &SpdOperator) -> Result<Self> {
        check_len("M", self.a.nrows(), m.dim())?;
        check_len("N", self.a.ncols(), n.dim())?;
        self.m = Block {
            inverse: m.inverse().clone(),
            forward: Some(m.forward().clone()),
        };
        self.n = Block {
            inverse: n.inverse().clone(),
            forward: Some(n.forward().clone()),
        };
        Ok(self)
    }

    /// Installs only `M⁻¹` and `N⁻¹`. Enough for TriCG and TriMR with
    /// recurrence residuals; explicit residuals and the baselines also need
    /// the forward actions.
    pub fn with_inverse_preconditioners(mut self, m_inv: OperatorHandle, n_inv: OperatorHandle) -> Result<Self> {
        for (ctx, op, d) in [("M⁻¹", &m_inv, self.a.nrows()), ("N⁻¹", &n_inv, self.a.ncols())] {
            check_len(ctx, d, op.nrows())?;
            check_len(ctx, d, op.ncols())?;
        }
        self.m = Block {
            inverse: m_inv,
            forward: None,
        };
        self.n = Block {
            inverse: n_inv,
            forward: None,
        };
        Ok(self)
    }

    /// Sets `τ ∈ {+1, −1}` and `ν ∈ {+1, 0, −1}`.
    pub fn with_signs(mut self, tau: Sign, nu: Sign) -> Result<Self> {
        if tau == Sign::Zero {
            return Err(Error::InvalidArgument("tau must be +1 or -1".into()));
        }
        self.tau = tau;
        self.nu = nu;
        Ok(self)
    }

    /// `(m, n)` where `A` is `m × n`.
    pub fn dims(&self) -> (usize, usize) {
        (self.a.nrows(), self.a.ncols())
    }

    pub fn a(&self) -> &OperatorHandle {
        &self.a
    }

    pub fn m_inv(&self) -> &OperatorHandle {
        &self.m.inverse
    }

    pub fn n_inv(&self) -> &OperatorHandle {
        &self.n.inverse
    }

    pub fn m_forward(&self) -> Option<&OperatorHandle> {
        self.m.forward.as_ref()
    }

    pub fn n_forward(&self) -> Option<&OperatorHandle> {
        self.n.forward.as_ref()
    }

    pub fn b(&self) -> &DenseVector {
        &self.b
    }

    pub fn c(&self) -> &DenseVector {
        &self.c
    }

    pub fn tau(&self) -> Sign {
        self.tau
    }

    pub fn nu(&self) -> Sign {
        self.nu
    }

    /// Fails unless the forward actions needed to apply `K` are present.
    pub fn require_forward(&self) -> Result<()> {
        if self.m.forward.is_none() {
            return Err(Error::MissingForwardOperator("M"));
        }
        if self.n.forward.is_none() && self.nu != Sign::Zero {
            return Err(Error::MissingForwardOperator("N"));
        }
        Ok(())
    }

    /// `K·(x, y)` split into its two blocks.
    pub fn apply_k(&self, x: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (m, n) = self.dims();
        check_len("apply_k x", m, x.len())?;
        check_len("apply_k y", n, y.len())?;
        self.require_forward()?;
        let mut top = vec![0.0; m];
        let mut bot = vec![0.0; n];
        self.apply_k_into(x, y, &mut top, &mut bot);
        Ok((top, bot))
    }

    // Caller guarantees shapes and forward operators.
    pub(crate) fn apply_k_into(&self, x: &[f64], y: &[f64], top: &mut [f64], bot: &mut [f64]) {
        self.m.forward.as_ref().unwrap().gemv_unchecked(x, 0.0, top);
        if self.tau == Sign::Minus {
            top.iter_mut().for_each(|t| *t = -*t);
        }
        self.a.gemv_unchecked(y, 1.0, top);
        match (self.nu, self.n.forward.as_ref()) {
            (Sign::Zero, _) | (_, None) => bot.fill(0.0),
            (nu, Some(nf)) => {
                nf.gemv_unchecked(y, 0.0, bot);
                if nu == Sign::Minus {
                    bot.iter_mut().for_each(|t| *t = -*t);
                }
            }
        }
        self.a.gemv_adjoint_unchecked(x, 1.0, bot);
    }

    /// `‖(b, c) − K(x, y)‖_{H⁻¹}` computed from scratch.
    pub fn explicit_residual(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let (mut rb, mut rc) = self.apply_k(x, y)?;
        for (r, b) in rb.iter_mut().zip(self.b.iter()) {
            *r = b - *r;
        }
        for (r, c) in rc.iter_mut().zip(self.c.iter()) {
            *r = c - *r;
        }
        Ok(self.h_inv_norm(&rb, &rc))
    }

    /// `(rbᵀM⁻¹rb + rcᵀN⁻¹rc)^{1/2}`
    pub(crate) fn h_inv_norm(&self, rb: &[f64], rc: &[f64]) -> f64 {
        let mut t = vec![0.0; rb.len()];
        self.m.inverse.gemv_unchecked(rb, 0.0, &mut t);
        let sb = dot(rb, &t);
        let mut t = vec![0.0; rc.len()];
        self.n.inverse.gemv_unchecked(rc, 0.0, &mut t);
        let sc = dot(rc, &t);
        (sb + sc).max(0.0).sqrt()
    }

    /// The indefinite error measure `e_rᵀ K e_r` with `e_r = (x* − x, y* − y)`.
    ///
    /// Diagnostic only. For the SQD signs it equals twice the gap of the
    /// saddle function `½‖x‖²_M − ½‖y‖²_N + xᵀAy − bᵀx − cᵀy` between the
    /// iterate and the solution, and it may change sign between iterations.
    pub fn error_metric(&self, x: &[f64], y: &[f64], x_star: &[f64], y_star: &[f64]) -> Result<f64> {
        let (m, n) = self.dims();
        check_len("error_metric x*", m, x_star.len())?;
        check_len("error_metric y*", n, y_star.len())?;
        check_len("error_metric x", m, x.len())?;
        check_len("error_metric y", n, y.len())?;
        let ex: Vec<f64> = x_star.iter().zip(x).map(|(a, b)| a - b).collect();
        let ey: Vec<f64> = y_star.iter().zip(y).map(|(a, b)| a - b).collect();
        let (kx, ky) = self.apply_k(&ex, &ey)?;
        Ok(dot(&ex, &kx) + dot(&ey, &ky))
    }

    /// `K` as a dense `(m+n) × (m+n)` matrix. Test-scale only.
    pub fn dense_k(&self) -> Result<DMatrix<f64>> {
        self.require_forward()?;
        let (m, n) = self.dims();
        let mut k = DMatrix::zeros(m + n, m + n);
        let a = self.a.to_dense();
        let mm = self.m.forward.as_ref().unwrap().to_dense() * self.tau.value();
        k.view_mut((0, 0), (m, m)).copy_from(&mm);
        k.view_mut((0, m), (m, n)).copy_from(&a);
        k.view_mut((m, 0), (n, m)).copy_from(&a.transpose());
        if let (Some(nf), true) = (self.n.forward.as_ref(), self.nu != Sign::Zero) {
            k.view_mut((m, m), (n, n)).copy_from(&(nf.to_dense() * self.nu.value()));
        }
        Ok(k)
    }
}

/// Knobs shared by every solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Absolute residual tolerance `εₐ`.
    pub atol: f64,
    /// Relative residual tolerance `ε_r`.
    pub rtol: f64,
    /// Iteration cap; `None` means `2(m + n)`.
    pub max_iterations: Option<usize>,
    /// Recompute `‖rₖ‖_{H⁻¹}` from scratch every iteration instead of using
    /// the recurrence. Costs one extra application of `K` and `H⁻¹`.
    pub explicit_residual: bool,
    /// Scales the tridiagonalization breakdown tolerance
    /// `√eps · factor · ‖T‖_est`.
    pub breakdown_tol_factor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            atol: 1e-12,
            rtol: 1e-10,
            max_iterations: None,
            explicit_residual: false,
            breakdown_tol_factor: 1.0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(self.atol >= 0.0) || !self.atol.is_finite() {
            return bad("atol must be finite and nonnegative");
        }
        if !(self.rtol >= 0.0) || !self.rtol.is_finite() {
            return bad("rtol must be finite and nonnegative");
        }
        if self.max_iterations == Some(0) {
            return bad("max_iterations must be at least 1");
        }
        if !(self.breakdown_tol_factor >= 0.0) || !self.breakdown_tol_factor.is_finite() {
            return bad("breakdown_tol_factor must be finite and nonnegative");
        }
        Ok(())
    }

    pub fn max_iterations_for(&self, m: usize, n: usize) -> usize {
        self.max_iterations.unwrap_or(2 * (m + n))
    }

    /// `εₐ + ‖(b, c)‖_{H⁻¹}·ε_r` with `‖(b, c)‖_{H⁻¹} = √(β₁² + γ₁²)`.
    pub fn threshold(&self, beta1: f64, gamma1: f64) -> f64 {
        self.atol + beta1.hypot(gamma1) * self.rtol
    }
}

/// `true` iff `rnorm ≤ εₐ + √(β₁² + γ₁²)·ε_r` (inclusive).
///
/// ```
/// use sqd_krylov::{stopping_check, SolverOptions};
///
/// let opts = SolverOptions::default();
/// assert!(stopping_check(0.0, (3.0, 4.0), &opts));
/// assert!(stopping_check(1e-12 + 5e-10, (3.0, 4.0), &opts));
/// assert!(!stopping_check(1e-9, (3.0, 4.0), &opts));
/// ```
pub fn stopping_check(rnorm: f64, rnorm0_components: (f64, f64), opts: &SolverOptions) -> bool {
    let (beta1, gamma1) = rnorm0_components;
    rnorm <= opts.threshold(beta1, gamma1)
}
