//! SYMMLQ and MINRES on the full `(m+n)`-dimensional system, preconditioned
//! with `H = blkdiag(M, N)`. They exist to compare iteration counts against
//! TriCG and TriMR under the same stopping rule and the same residual norm.

mod minres;
mod symmlq;

pub use minres::minres_solve;
pub use symmlq::symmlq_solve;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::problem::{stopping_check, SolverOptions, SqdProblem};
use crate::report::{SolveReport, Status};
use crate::vector::{axpy, dot, scale, DenseVector};

/// `K`, `H⁻¹` and `(b, c)` seen as one symmetric system of size `m + n`.
///
/// Needs the forward actions of `M` and `N` (except `N` when `ν = 0`).
///
/// ```
/// use nalgebra::DMatrix;
/// use sqd_krylov::{DenseVector, FullSystemView, OperatorHandle, SqdProblem};
///
/// let a = OperatorHandle::from_dense(DMatrix::from_row_slice(1, 2, &[1.0, 2.0]));
/// let p = SqdProblem::new(a, DenseVector::new(vec![1.0])?, DenseVector::new(vec![0.0, 1.0])?)?;
/// let view = FullSystemView::new(&p)?;
/// let mut out = vec![0.0; 3];
/// view.apply_k(&[1.0, 0.0, 0.0], &mut out);
/// assert_eq!(out, vec![1.0, 1.0, 2.0]);
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
#[derive(Debug, Clone)]
pub struct FullSystemView {
    problem: SqdProblem,
    m: usize,
}

impl FullSystemView {
    pub fn new(problem: &SqdProblem) -> Result<Self> {
        problem.require_forward()?;
        Ok(Self {
            problem: problem.clone(),
            m: problem.dims().0,
        })
    }

    pub fn dim(&self) -> usize {
        let (m, n) = self.problem.dims();
        m + n
    }

    pub fn problem(&self) -> &SqdProblem {
        &self.problem
    }

    /// `out = K x`. Panics on length mismatch.
    pub fn apply_k(&self, x: &[f64], out: &mut [f64]) {
        assert!(x.len() == self.dim() && out.len() == self.dim(), "FullSystemView::apply_k: length mismatch");
        let (top, bot) = out.split_at_mut(self.m);
        self.problem.apply_k_into(&x[..self.m], &x[self.m..], top, bot);
    }

    /// `out = H⁻¹ x`. Panics on length mismatch.
    pub fn apply_h_inv(&self, x: &[f64], out: &mut [f64]) {
        assert!(x.len() == self.dim() && out.len() == self.dim(), "FullSystemView::apply_h_inv: length mismatch");
        let (top, bot) = out.split_at_mut(self.m);
        self.problem.m_inv().gemv_unchecked(&x[..self.m], 0.0, top);
        self.problem.n_inv().gemv_unchecked(&x[self.m..], 0.0, bot);
    }

    /// `(b, c)` stacked.
    pub fn rhs(&self) -> Vec<f64> {
        let mut r = self.problem.b().to_vec();
        r.extend_from_slice(self.problem.c());
        r
    }

    fn split(&self, z: Vec<f64>) -> (DenseVector, DenseVector) {
        let mut x = z;
        let y = x.split_off(self.m);
        (DenseVector::from_vec_unchecked(x), DenseVector::from_vec_unchecked(y))
    }

    fn explicit_residual(&self, z: &[f64]) -> Result<f64> {
        self.problem.explicit_residual(&z[..self.m], &z[self.m..])
    }
}

// Preconditioned Lanczos on K with H⁻¹: vₖ are H-orthonormal, hv = H vₖ.
// After `step`, slot `cur` holds vₖ₊₁ and slot `1 − cur` holds vₖ.
#[derive(Debug)]
struct Lanczos {
    v: [Vec<f64>; 2],
    hv: [Vec<f64>; 2],
    cur: usize,
    beta: f64,
    beta1: f64,
    est: f64,
    exhausted: bool,
}

impl Lanczos {
    fn new(view: &FullSystemView) -> Result<Self> {
        let d = view.dim();
        let rhs = view.rhs();
        let mut z = vec![0.0; d];
        view.apply_h_inv(&rhs, &mut z);
        let sq = dot(&rhs, &z);
        if !sq.is_finite() || sq < 0.0 {
            return Err(Error::InvalidArgument("H⁻¹ is not positive definite on (b, c)".into()));
        }
        let beta1 = sq.sqrt();
        if beta1 == 0.0 {
            return Err(Error::InvalidArgument("right-hand side (b, c) is zero".into()));
        }
        let mut hv = rhs;
        scale(1.0 / beta1, &mut z);
        scale(1.0 / beta1, &mut hv);
        Ok(Self {
            v: [vec![0.0; d], z],
            hv: [vec![0.0; d], hv],
            cur: 1,
            beta: beta1,
            beta1,
            est: 0.0,
            exhausted: false,
        })
    }

    fn v_curr(&self) -> &[f64] {
        &self.v[self.cur]
    }

    fn v_prev(&self) -> &[f64] {
        &self.v[1 - self.cur]
    }

    // Returns (αₖ, βₖ₊₁).
    fn step(&mut self, view: &FullSystemView) -> Result<(f64, f64)> {
        let (c, p) = (self.cur, 1 - self.cur);
        let mut kv = vec![0.0; view.dim()];
        view.apply_k(&self.v[c], &mut kv);
        // kv − βₖ H vₖ₋₁
        axpy(-self.beta, &self.hv[p], &mut kv);
        let alpha = dot(&self.v[c], &kv);
        axpy(-alpha, &self.hv[c], &mut kv);
        view.apply_h_inv(&kv, &mut self.v[p]);
        let sq = dot(&kv, &self.v[p]);
        if !alpha.is_finite() || !sq.is_finite() || sq < 0.0 {
            return Err(Error::NonFinite { index: 0 });
        }
        let mut beta_next = sq.sqrt();
        self.est = self.est.max(alpha.hypot(beta_next).hypot(self.beta));
        self.hv[p] = kv;
        if beta_next <= f64::EPSILON.sqrt() * self.est {
            beta_next = 0.0;
            self.v[p].fill(0.0);
            self.hv[p].fill(0.0);
            self.exhausted = true;
        } else {
            scale(1.0 / beta_next, &mut self.v[p]);
            scale(1.0 / beta_next, &mut self.hv[p]);
        }
        self.cur = p;
        self.beta = beta_next;
        Ok((alpha, beta_next))
    }
}

// Shared loop bookkeeping for both baselines.
struct Run<'a> {
    view: &'a FullSystemView,
    opts: &'a SolverOptions,
    start: Instant,
    history: Vec<f64>,
    beta1: f64,
}

impl<'a> Run<'a> {
    fn new(view: &'a FullSystemView, opts: &'a SolverOptions, beta1: f64) -> Self {
        Self {
            view,
            opts,
            start: Instant::now(),
            history: vec![beta1],
            beta1,
        }
    }

    fn maxit(&self) -> usize {
        let (m, n) = self.view.problem.dims();
        self.opts.max_iterations_for(m, n)
    }

    // Records a residual (explicit when requested) and reports convergence.
    fn record(&mut self, recurrence: f64, z: &[f64]) -> Result<bool> {
        let r = if self.opts.explicit_residual {
            self.view.explicit_residual(z)?
        } else {
            recurrence
        };
        self.history.push(r);
        Ok(stopping_check(r, (self.beta1, 0.0), self.opts))
    }

    fn finish(self, status: Status, z: Vec<f64>, message: Option<String>) -> SolveReport {
        let (x, y) = self.view.split(z);
        SolveReport {
            status,
            iterations: self.history.len() - 1,
            residual_history: self.history,
            x,
            y,
            elapsed: self.start.elapsed(),
            message,
        }
    }
}

fn exhausted_message(k: usize, rnorm: f64) -> String {
    format!("Lanczos basis exhausted at k = {k} with residual {rnorm:e}")
}
