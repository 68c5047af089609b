#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqd_krylov::{
    CsrMatrix, DenseVector, OperatorHandle, Sign, SpdOperator, SqdProblem, SsyCoefficients, SsyProcess,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dv(v: &[f64]) -> DenseVector {
    DenseVector::new(v.to_vec()).unwrap()
}

pub fn random_dense(r: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| if r.gen::<f64>() < density { r.gen_range(-1.0..1.0) } else { 0.0 })
}

pub fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
}

/// Random SPD matrix with condition number roughly ≤ 10.
pub fn random_spd(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let b = random_dense(r, n, n, 1.0);
    let mut s = &b * b.transpose() / n as f64;
    for i in 0..n {
        s[(i, i)] += 1.0;
    }
    s
}

pub fn random_diag(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(0.5..2.0)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Precond {
    Identity,
    Diagonal,
    Dense,
}

/// A random problem with a random right-hand side.
pub fn random_problem(seed: u64, m: usize, n: usize, density: f64, pc: Precond) -> SqdProblem {
    let mut r = rng(seed);
    let a = random_dense(&mut r, m, n, density);
    let b = random_vec(&mut r, m);
    let c = random_vec(&mut r, n);
    let (mm, nn) = match pc {
        Precond::Identity => (SpdOperator::identity(m), SpdOperator::identity(n)),
        Precond::Diagonal => (
            SpdOperator::diagonal(random_diag(&mut r, m)).unwrap(),
            SpdOperator::diagonal(random_diag(&mut r, n)).unwrap(),
        ),
        Precond::Dense => (
            SpdOperator::dense(random_spd(&mut r, m)).unwrap(),
            SpdOperator::dense(random_spd(&mut r, n)).unwrap(),
        ),
    };
    let a = OperatorHandle::from_csr(CsrMatrix::from_dense(&a).unwrap());
    SqdProblem::new(a, dv(&b), dv(&c)).unwrap().with_preconditioners(&mm, &nn).unwrap()
}

pub fn with_signs(p: SqdProblem, tau: i8, nu: i8) -> SqdProblem {
    p.with_signs(Sign::try_from(tau).unwrap(), Sign::try_from(nu).unwrap()).unwrap()
}

pub fn dense_solve(k: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    k.clone().lu().solve(rhs).expect("nonsingular")
}

pub fn rhs_vector(p: &SqdProblem) -> DVector<f64> {
    let mut v: Vec<f64> = p.b().to_vec();
    v.extend_from_slice(p.c());
    DVector::from_vec(v)
}

pub fn stack(x: &[f64], y: &[f64]) -> DVector<f64> {
    DVector::from_iterator(x.len() + y.len(), x.iter().chain(y).copied())
}

pub fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Bases and scalars of `steps` tridiagonalization steps, recorded
/// independently of the solvers. `v` holds v₁..vₖ₊₁ (the last one
/// unnormalized if the process terminated).
pub struct Basis {
    pub v: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub co: SsyCoefficients,
    pub terminated: bool,
}

pub fn ssy_basis(p: &SqdProblem, steps: usize) -> Basis {
    let (m, n) = p.dims();
    let mut ssy = SsyProcess::new(p, 1.0).unwrap();
    let mut vs = vec![ssy.v_curr().to_vec()];
    let mut us = vec![ssy.u_curr().to_vec()];
    let mut co = SsyCoefficients { alphas: vec![], betas: vec![ssy.beta1()], gammas: vec![ssy.gamma1()] };
    let mut terminated = false;
    for _ in 0..steps {
        let s = ssy.step().unwrap();
        co.alphas.push(s.alpha);
        co.betas.push(s.beta_next);
        co.gammas.push(s.gamma_next);
        vs.push(ssy.v_curr().to_vec());
        us.push(ssy.u_curr().to_vec());
        if s.terminated {
            terminated = true;
            break;
        }
    }
    let v = DMatrix::from_fn(m, vs.len(), |i, j| vs[j][i]);
    let u = DMatrix::from_fn(n, us.len(), |i, j| us[j][i]);
    Basis { v, u, co, terminated }
}

/// Wₖ = [w₁ … w₂ₖ] with w₂ⱼ₋₁ = (vⱼ, 0), w₂ⱼ = (0, uⱼ).
pub fn interleaved_w(b: &Basis, k: usize) -> DMatrix<f64> {
    let (m, n) = (b.v.nrows(), b.u.nrows());
    let mut w = DMatrix::zeros(m + n, 2 * k);
    for j in 0..k {
        w.view_mut((0, 2 * j), (m, 1)).copy_from(&b.v.column(j));
        w.view_mut((m, 2 * j + 1), (n, 1)).copy_from(&b.u.column(j));
    }
    w
}

/// β₁e₁ + γ₁e₂ of length `len`.
pub fn e12(beta1: f64, gamma1: f64, len: usize) -> DVector<f64> {
    let mut r = DVector::zeros(len);
    r[0] = beta1;
    r[1] = gamma1;
    r
}

/// min‖S z − rhs‖ by dense SVD least squares; returns (z, residual norm).
pub fn least_squares(s: &DMatrix<f64>, rhs: &DVector<f64>) -> (DVector<f64>, f64) {
    let svd = s.clone().svd(true, true);
    let z = svd.solve(rhs, 1e-14).unwrap();
    let r = (s * &z - rhs).norm();
    (z, r)
}

/// Dense `blkdiag(M, N)` and its inverse.
pub fn dense_h(p: &SqdProblem) -> (DMatrix<f64>, DMatrix<f64>) {
    let (m, n) = p.dims();
    let mut h = DMatrix::zeros(m + n, m + n);
    let mut hi = DMatrix::zeros(m + n, m + n);
    h.view_mut((0, 0), (m, m)).copy_from(&p.m_forward().unwrap().to_dense());
    h.view_mut((m, m), (n, n)).copy_from(&p.n_forward().unwrap().to_dense());
    hi.view_mut((0, 0), (m, m)).copy_from(&p.m_inv().to_dense());
    hi.view_mut((m, m), (n, n)).copy_from(&p.n_inv().to_dense());
    (h, hi)
}

/// ‖(b, c) − K(x, y)‖_{H⁻¹} with every matrix formed densely.
pub fn dense_residual(p: &SqdProblem, x: &[f64], y: &[f64]) -> f64 {
    let k = p.dense_k().unwrap();
    let (_, hi) = dense_h(p);
    let r = rhs_vector(p) - k * stack(x, y);
    (r.transpose() * hi * &r)[(0, 0)].max(0.0).sqrt()
}
