//! Orthogonal tridiagonalization of `A` in the `M`- and `N`-norms.
//!
//! Starting from `β₁Mv₁ = b` and `γ₁Nu₁ = c`, the process builds
//! `M`-orthonormal `Vₖ` and `N`-orthonormal `Uₖ` with
//!
//! ```text
//! A Uₖ  = M Vₖ₊₁ Tₖ₊₁,ₖ        Aᵀ Vₖ = N Uₖ₊₁ Tₖ,ₖ₊₁ᵀ
//! ```
//!
//! where `Tₖ` is tridiagonal with diagonal `α`, subdiagonal `β₂..` and
//! superdiagonal `γ₂..`. Only `M⁻¹` and `N⁻¹` are applied.

mod reference;

use nalgebra::DMatrix;

pub use reference::{block_lanczos_reference, BlockLanczosBasis, BlockLanczosStatus};

use crate::error::{Block, Error, Result};
use crate::operators::OperatorHandle;
use crate::problem::{Sign, SqdProblem};
use crate::vector::{axpy, dot, scale};

/// Scalars produced by one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsyStep {
    pub alpha: f64,
    pub beta_next: f64,
    pub gamma_next: f64,
    /// Both `βₖ₊₁` and `γₖ₊₁` fell below the breakdown tolerance. A single
    /// small coefficient is reported as exactly zero and its block's next
    /// vector is zero; the process goes on with the other block.
    pub terminated: bool,
}

/// Persistent vector counts of a solver workspace.
///
/// `m_vectors`/`n_vectors` count the vectors of length `m`/`n` that any
/// solver needs with `M = N = I`. `m_preconditioner_vectors` and
/// `n_preconditioner_vectors` count the extra `v̄ = Mv`, `ū = Nu` buffers
/// that appear only when the preconditioner is not the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StorageReport {
    pub m_vectors: usize,
    pub n_vectors: usize,
    pub m_preconditioner_vectors: usize,
    pub n_preconditioner_vectors: usize,
}

impl std::ops::Add for StorageReport {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            m_vectors: self.m_vectors + o.m_vectors,
            n_vectors: self.n_vectors + o.n_vectors,
            m_preconditioner_vectors: self.m_preconditioner_vectors + o.m_preconditioner_vectors,
            n_preconditioner_vectors: self.n_preconditioner_vectors + o.n_preconditioner_vectors,
        }
    }
}

// Two generations of one side (v or u). With an identity preconditioner the
// bar vectors alias the normalized ones and `bar` is `None`.
#[derive(Debug, Clone)]
struct Side {
    vec: [Vec<f64>; 2],
    bar: Option<[Vec<f64>; 2]>,
}

impl Side {
    fn bar(&self, slot: usize) -> &[f64] {
        match &self.bar {
            Some(b) => &b[slot],
            None => &self.vec[slot],
        }
    }

    // (bar[p] mutable, vec[c], bar[c])
    fn parts(&mut self, p: usize, c: usize) -> (&mut [f64], &[f64], &[f64]) {
        debug_assert_ne!(p, c);
        match &mut self.bar {
            Some(bar) => {
                let (lo, hi) = bar.split_at_mut(1);
                let (bp, bc) = if p == 0 { (&mut lo[0], &hi[0]) } else { (&mut hi[0], &lo[0]) };
                (bp, &self.vec[c], bc)
            }
            None => {
                let (lo, hi) = self.vec.split_at_mut(1);
                let (vp, vc) = if p == 0 { (&mut lo[0], &hi[0]) } else { (&mut hi[0], &lo[0]) };
                (vp, vc, vc)
            }
        }
    }
}

/// The running tridiagonalization.
///
/// After `step()` number `k`, the "previous" slot holds `vₖ`/`uₖ` (the
/// vectors that step consumed) and the "current" slot holds `vₖ₊₁`/`uₖ₊₁`.
/// Before the first step the previous slot is zero and the current slot
/// holds `v₁`/`u₁`.
///
/// ```
/// use sqd_krylov::{DenseVector, OperatorHandle, SqdProblem, SsyProcess};
///
/// let a = OperatorHandle::from_dense(nalgebra::DMatrix::from_element(1, 1, 2.0));
/// let p = SqdProblem::new(a, DenseVector::new(vec![3.0])?, DenseVector::new(vec![4.0])?)?;
/// let mut ssy = SsyProcess::new(&p, 1.0)?;
/// assert_eq!((ssy.beta1(), ssy.gamma1()), (3.0, 4.0));
/// let s = ssy.step()?;
/// assert_eq!((s.alpha, s.beta_next, s.gamma_next), (2.0, 0.0, 0.0));
/// assert!(s.terminated);
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
#[derive(Debug, Clone)]
pub struct SsyProcess {
    a: OperatorHandle,
    m_inv: OperatorHandle,
    n_inv: OperatorHandle,
    v: Side,
    u: Side,
    cur: usize,
    k: usize,
    beta: f64,
    gamma: f64,
    beta1: f64,
    gamma1: f64,
    est: f64,
    tol_factor: f64,
    terminated: bool,
}

impl SsyProcess {
    /// Normalizes `b` and `c`: `β₁ = ‖b‖_{M⁻¹}`, `v₁ = M⁻¹b/β₁`, and
    /// likewise for `c`.
    pub fn new(problem: &SqdProblem, breakdown_tol_factor: f64) -> Result<Self> {
        let (m, n) = problem.dims();
        let (b, c) = (problem.b(), problem.c());
        if b.is_zero() {
            return Err(Error::ZeroInitialVector(Block::B));
        }
        if c.is_zero() {
            return Err(Error::ZeroInitialVector(Block::C));
        }
        let (v, beta1) = init_side(b, problem.m_inv(), Block::B)?;
        let (u, gamma1) = init_side(c, problem.n_inv(), Block::C)?;
        debug_assert_eq!(v.vec[0].len(), m);
        debug_assert_eq!(u.vec[0].len(), n);
        Ok(Self {
            a: problem.a().clone(),
            m_inv: problem.m_inv().clone(),
            n_inv: problem.n_inv().clone(),
            v,
            u,
            cur: 1,
            k: 0,
            beta: beta1,
            gamma: gamma1,
            beta1,
            gamma1,
            est: 0.0,
            tol_factor: breakdown_tol_factor,
            terminated: false,
        })
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    /// Number of completed steps.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    pub fn v_prev(&self) -> &[f64] {
        &self.v.vec[1 - self.cur]
    }

    pub fn v_curr(&self) -> &[f64] {
        &self.v.vec[self.cur]
    }

    pub fn u_prev(&self) -> &[f64] {
        &self.u.vec[1 - self.cur]
    }

    pub fn u_curr(&self) -> &[f64] {
        &self.u.vec[self.cur]
    }

    /// `v̄ = M v` for the current slot.
    pub fn mv_curr(&self) -> &[f64] {
        self.v.bar(self.cur)
    }

    /// `ū = N u` for the current slot.
    pub fn nu_curr(&self) -> &[f64] {
        self.u.bar(self.cur)
    }

    pub fn storage(&self) -> StorageReport {
        StorageReport {
            m_vectors: 2,
            n_vectors: 2,
            m_preconditioner_vectors: if self.v.bar.is_some() { 2 } else { 0 },
            n_preconditioner_vectors: if self.u.bar.is_some() { 2 } else { 0 },
        }
    }

    /// One step: produces `αₖ`, `βₖ₊₁`, `γₖ₊₁` and, unless terminated,
    /// `vₖ₊₁`, `uₖ₊₁`.
    pub fn step(&mut self) -> Result<SsyStep> {
        if self.terminated {
            return Err(Error::InvalidArgument("tridiagonalization already terminated".into()));
        }
        let (c, p) = (self.cur, 1 - self.cur);
        let (beta_k, gamma_k) = (self.beta, self.gamma);

        // q = A uₖ − γₖ v̄ₖ₋₁ − αₖ v̄ₖ, written over v̄ₖ₋₁.
        let (q, vk, vbar_k) = self.v.parts(p, c);
        self.a.gemv_unchecked(&self.u.vec[c], -gamma_k, q);
        let alpha = dot(vk, q);
        axpy(-alpha, vbar_k, q);
        // p = Aᵀ vₖ − βₖ ūₖ₋₁ − αₖ ūₖ, written over ūₖ₋₁.
        let (pv, _, ubar_k) = self.u.parts(p, c);
        self.a.gemv_adjoint_unchecked(&self.v.vec[c], -beta_k, pv);
        axpy(-alpha, ubar_k, pv);
        if !alpha.is_finite() {
            return Err(Error::NonFinite { index: self.k });
        }

        let beta_next = normalize_prep(&mut self.v, &self.m_inv, p, Block::B, self.k + 1)?;
        let gamma_next = normalize_prep(&mut self.u, &self.n_inv, p, Block::C, self.k + 1)?;

        let mut h = alpha.hypot(beta_next).hypot(gamma_next);
        if self.k >= 1 {
            h = h.hypot(beta_k).hypot(gamma_k);
        }
        self.est = self.est.max(h);
        let tol = f64::EPSILON.sqrt() * self.tol_factor * self.est;
        // One exhausted block does not end the process: its next vector is
        // set to zero and the other block keeps growing.
        let beta_next = close_side(&mut self.v, p, beta_next, tol);
        let gamma_next = close_side(&mut self.u, p, gamma_next, tol);
        let terminated = beta_next == 0.0 && gamma_next == 0.0;

        self.cur = p;
        self.k += 1;
        self.beta = beta_next;
        self.gamma = gamma_next;
        self.terminated = terminated;
        Ok(SsyStep {
            alpha,
            beta_next,
            gamma_next,
            terminated,
        })
    }
}

fn init_side(rhs: &[f64], inv: &OperatorHandle, block: Block) -> Result<(Side, f64)> {
    let len = rhs.len();
    let mut side = if inv.is_identity() {
        Side {
            vec: [vec![0.0; len], rhs.to_vec()],
            bar: None,
        }
    } else {
        let mut v = vec![0.0; len];
        inv.gemv_unchecked(rhs, 0.0, &mut v);
        Side {
            vec: [vec![0.0; len], v],
            bar: Some([vec![0.0; len], rhs.to_vec()]),
        }
    };
    let sq = dot(side.bar(1), &side.vec[1]);
    if !(sq > 0.0) || !sq.is_finite() {
        return Err(Error::PreconditionerNotSpd {
            block,
            step: 1,
            value: sq,
        });
    }
    let beta = sq.sqrt();
    finish_normalize(&mut side, 1, beta);
    Ok((side, beta))
}

// Applies the inverse to the bar vector in slot p (if any) and returns the
// elliptic norm.
fn normalize_prep(side: &mut Side, inv: &OperatorHandle, p: usize, block: Block, step: usize) -> Result<f64> {
    let sq = match &mut side.bar {
        Some(bar) => {
            inv.gemv_unchecked(&bar[p], 0.0, &mut side.vec[p]);
            dot(&bar[p], &side.vec[p])
        }
        None => dot(&side.vec[p], &side.vec[p]),
    };
    if sq < 0.0 || !sq.is_finite() {
        return Err(Error::PreconditionerNotSpd {
            block,
            step: step + 1,
            value: sq,
        });
    }
    Ok(sq.sqrt())
}

// Normalizes slot p, or zeroes it when its norm is at or below `tol`.
fn close_side(side: &mut Side, slot: usize, norm: f64, tol: f64) -> f64 {
    if norm > tol {
        finish_normalize(side, slot, norm);
        return norm;
    }
    side.vec[slot].fill(0.0);
    if let Some(bar) = &mut side.bar {
        bar[slot].fill(0.0);
    }
    0.0
}

fn finish_normalize(side: &mut Side, slot: usize, norm: f64) {
    let s = 1.0 / norm;
    scale(s, &mut side.vec[slot]);
    if let Some(bar) = &mut side.bar {
        scale(s, &mut bar[slot]);
    }
}

/// The `α`, `β`, `γ` sequences of a run, kept for oracles and assembly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SsyCoefficients {
    pub alphas: Vec<f64>,
    /// `β₁, β₂, …`
    pub betas: Vec<f64>,
    /// `γ₁, γ₂, …`
    pub gammas: Vec<f64>,
}

impl SsyCoefficients {
    /// Runs the process for up to `steps` steps and records the scalars.
    pub fn collect(problem: &SqdProblem, steps: usize, breakdown_tol_factor: f64) -> Result<Self> {
        let mut ssy = SsyProcess::new(problem, breakdown_tol_factor)?;
        let mut out = Self {
            alphas: vec![],
            betas: vec![ssy.beta1()],
            gammas: vec![ssy.gamma1()],
        };
        for _ in 0..steps {
            let s = ssy.step()?;
            out.alphas.push(s.alpha);
            out.betas.push(s.beta_next);
            out.gammas.push(s.gamma_next);
            if s.terminated {
                break;
            }
        }
        Ok(out)
    }

    pub fn steps(&self) -> usize {
        self.alphas.len()
    }
}

/// Assembles the `rows × 2k` leading block of the symmetric block-tridiagonal
/// matrix `S` (`rows` is `2k` for `Sₖ` or `2k + 2` for `Sₖ₊₁,ₖ`).
///
/// Columns are ordered `v₁, u₁, v₂, u₂, …`. Diagonal blocks are
/// `Θⱼ = [[τ, αⱼ], [αⱼ, ν]]` and the coupling between block rows `j` and
/// `j + 1` is `Ψⱼ₊₁ = [[0, γⱼ₊₁], [βⱼ₊₁, 0]]`.
///
/// ```
/// use sqd_krylov::{assemble_s, Sign, SsyCoefficients};
///
/// let co = SsyCoefficients { alphas: vec![2.0], betas: vec![3.0, 0.0], gammas: vec![4.0, 0.0] };
/// let s1 = assemble_s(&co, Sign::Plus, Sign::Minus, 2, 1)?;
/// assert_eq!(s1, nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]));
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
pub fn assemble_s(co: &SsyCoefficients, tau: Sign, nu: Sign, rows: usize, k: usize) -> Result<DMatrix<f64>> {
    if rows != 2 * k && rows != 2 * k + 2 {
        return Err(Error::InvalidArgument(format!("rows must be 2k or 2k+2, got {rows} for k={k}")));
    }
    let blocks = rows / 2;
    if co.alphas.len() < k || co.betas.len() < blocks || co.gammas.len() < blocks {
        return Err(Error::InvalidArgument(format!(
            "need {k} alphas and {blocks} betas/gammas, have {}/{}/{}",
            co.alphas.len(),
            co.betas.len(),
            co.gammas.len()
        )));
    }
    let cols = 2 * k;
    let mut s = DMatrix::zeros(rows, cols);
    let mut put = |i: usize, j: usize, v: f64| {
        if i < rows && j < cols {
            s[(i, j)] = v;
        }
    };
    for j in 0..k {
        let (o, e) = (2 * j, 2 * j + 1);
        put(o, o, tau.value());
        put(o, e, co.alphas[j]);
        put(e, o, co.alphas[j]);
        put(e, e, nu.value());
        if j + 1 < blocks {
            let (b, g) = (co.betas[j + 1], co.gammas[j + 1]);
            put(o, e + 2, g);
            put(e + 2, o, g);
            put(e, o + 2, b);
            put(o + 2, e, b);
        }
    }
    Ok(s)
}
