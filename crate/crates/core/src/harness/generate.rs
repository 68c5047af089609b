use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Block, Error, Result};
use crate::operators::{CsrMatrix, OperatorHandle, SpdOperator};
use crate::problem::{Sign, SqdProblem};
use crate::vector::DenseVector;

/// Preconditioners installed by [`generate_sqd`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreconditionerKind {
    /// `M = I`, `N = I`.
    Identity,
    /// Diagonals drawn uniformly from `[1, 2]`.
    Diagonal,
    /// `diag(d) + UUᵀ` with `d ∈ [1, 2]` and `U` of the given rank with
    /// entries uniform in `[−1, 1]/√rank`.
    DiagonalPlusLowRank { rank: usize },
}

/// Everything that determines a synthetic problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub m: usize,
    pub n: usize,
    /// Probability that an entry of `A` is stored, in `(0, 1]`.
    pub density: f64,
    pub seed: u64,
    pub preconditioner: PreconditionerKind,
    pub tau: Sign,
    pub nu: Sign,
    /// Added to the diagonal of `N`.
    pub nshift: f64,
}

impl SyntheticSpec {
    /// Identity preconditioners, `τ = +1`, `ν = −1`, no shift.
    pub fn new(m: usize, n: usize, density: f64, seed: u64) -> Self {
        Self {
            m,
            n,
            density,
            seed,
            preconditioner: PreconditionerKind::Identity,
            tau: Sign::Plus,
            nu: Sign::Minus,
            nshift: 0.0,
        }
    }
}

/// A sparse `m × n` matrix whose entries are stored with probability
/// `density` and drawn uniformly from `[−1, 1]`. Equal seeds give identical
/// matrices.
pub fn generate_random_sparse(m: usize, n: usize, density: f64, seed: u64) -> Result<CsrMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_sparse(&mut rng, m, n, density)
}

fn random_sparse(rng: &mut ChaCha8Rng, m: usize, n: usize, density: f64) -> Result<CsrMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("m and n must be at least 1".into()));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!("density {density} is not in (0, 1]")));
    }
    let mut row_offsets = Vec::with_capacity(m + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_offsets.push(0);
    for _ in 0..m {
        for j in 0..n {
            if density >= 1.0 || rng.gen::<f64>() < density {
                cols.push(j);
                vals.push(rng.gen_range(-1.0..=1.0));
            }
        }
        row_offsets.push(cols.len());
    }
    CsrMatrix::new(m, n, row_offsets, cols, vals)
}

fn random_preconditioner(rng: &mut ChaCha8Rng, dim: usize, kind: PreconditionerKind) -> Result<SpdOperator> {
    match kind {
        PreconditionerKind::Identity => Ok(SpdOperator::identity(dim)),
        PreconditionerKind::Diagonal => SpdOperator::diagonal((0..dim).map(|_| rng.gen_range(1.0..=2.0)).collect()),
        PreconditionerKind::DiagonalPlusLowRank { rank } => {
            let d = (0..dim).map(|_| rng.gen_range(1.0..=2.0)).collect();
            let s = 1.0 / (rank.max(1) as f64).sqrt();
            let u = DMatrix::from_fn(dim, rank, |_, _| s * rng.gen_range(-1.0..=1.0));
            SpdOperator::diagonal_plus_low_rank(d, u)
        }
    }
}

/// The SQD system `[[M, A], [Aᵀ, −N]]` with `M = N = I` whose solution is
/// the vector of ones.
///
/// ```
/// use sqd_krylov::{generate_random_sqd, tricg_solve, SolverOptions};
///
/// let p = generate_random_sqd(40, 30, 0.2, 7)?;
/// let r = tricg_solve(&p, &SolverOptions::default())?;
/// assert!(r.converged());
/// assert!(r.x.iter().chain(r.y.iter()).all(|v| (v - 1.0).abs() < 1e-6));
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
pub fn generate_random_sqd(m: usize, n: usize, density: f64, seed: u64) -> Result<SqdProblem> {
    generate_sqd(&SyntheticSpec::new(m, n, density, seed))
}

/// Builds the problem described by `spec`. `A`, then `M`, then `N` are drawn
/// from one seeded stream.
pub fn generate_sqd(spec: &SyntheticSpec) -> Result<SqdProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let a = random_sparse(&mut rng, spec.m, spec.n, spec.density)?;
    let mm = random_preconditioner(&mut rng, spec.m, spec.preconditioner)?;
    let nn = random_preconditioner(&mut rng, spec.n, spec.preconditioner)?.shifted(spec.nshift)?;
    build_known_solution(OperatorHandle::from_csr(a), &mm, &nn, spec.tau, spec.nu)
}

/// `M = N = I` and `(b, c)` chosen so that `(1ₘ, 1ₙ)` solves the system:
/// `b = τ1ₘ + A1ₙ`, `c = Aᵀ1ₘ + ν1ₙ`.
///
/// ```
/// use sqd_krylov::{build_sqd_from_a, CsrMatrix, Error, Sign};
///
/// let zero = CsrMatrix::from_triplets(2, 2, &[])?;
/// let p = build_sqd_from_a(zero, Sign::Plus, Sign::Minus)?;
/// assert_eq!((p.b().as_slice(), p.c().as_slice()), (&[1.0, 1.0][..], &[-1.0, -1.0][..]));
///
/// let eye = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)])?;
/// assert!(matches!(build_sqd_from_a(eye, Sign::Plus, Sign::Minus), Err(Error::DegenerateRhs(_))));
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
pub fn build_sqd_from_a(a: CsrMatrix, tau: Sign, nu: Sign) -> Result<SqdProblem> {
    let (m, n) = (a.nrows(), a.ncols());
    build_known_solution(
        OperatorHandle::from_csr(a),
        &SpdOperator::identity(m),
        &SpdOperator::identity(n),
        tau,
        nu,
    )
}

/// General form of [`build_sqd_from_a`]: `b = τM1ₘ + A1ₙ`,
/// `c = Aᵀ1ₘ + νN1ₙ`. Fails with [`Error::DegenerateRhs`] if either block
/// comes out zero.
pub fn build_known_solution(
    a: OperatorHandle,
    m: &SpdOperator,
    n: &SpdOperator,
    tau: Sign,
    nu: Sign,
) -> Result<SqdProblem> {
    let (rows, cols) = (a.nrows(), a.ncols());
    let ones_m = vec![1.0; rows];
    let ones_n = vec![1.0; cols];
    let mut b = vec![0.0; rows];
    m.forward().gemv(&ones_m, 0.0, &mut b)?;
    b.iter_mut().for_each(|v| *v *= tau.value());
    a.gemv(&ones_n, 1.0, &mut b)?;
    let mut c = vec![0.0; cols];
    n.forward().gemv(&ones_n, 0.0, &mut c)?;
    c.iter_mut().for_each(|v| *v *= nu.value());
    a.gemv_adjoint(&ones_m, 1.0, &mut c)?;
    let b = DenseVector::new(b)?;
    let c = DenseVector::new(c)?;
    if b.is_zero() {
        return Err(Error::DegenerateRhs(Block::B));
    }
    if c.is_zero() {
        return Err(Error::DegenerateRhs(Block::C));
    }
    SqdProblem::new(a, b, c)?.with_preconditioners(m, n)?.with_signs(tau, nu)
}
