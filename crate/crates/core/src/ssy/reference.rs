//! Dense preconditioned block-Lanczos process with block size two.
//!
//! Used as an oracle: run on `K₀ = [[0, A], [Aᵀ, 0]]` with `H = blkdiag(M, N)`
//! and starting block `B = [b 0; 0 c]`, it spans the same spaces as the
//! tridiagonalization. `H` itself is never formed; each basis block is kept
//! together with its image `H wⱼ`.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{check_len, Error, Result};
use crate::operators::OperatorHandle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockLanczosStatus {
    Completed,
    /// The residual block lost rank, so block `step` (1-based) could not be
    /// formed; `W` holds `step − 1` blocks.
    BlockBreakdown { step: usize },
}

/// `W = [w₁ … wⱼ]` with `WᵀHW = I`, and the blocks of
///
/// ```text
/// K Wₖ = H Wₖ₊₁ Fₖ₊₁,ₖ,   Fₖ₊₁,ₖ = tridiag(Ψⱼ₊₁ᵀ, Ωⱼ, Ψⱼ)
/// ```
#[derive(Debug, Clone)]
pub struct BlockLanczosBasis {
    /// `(m+n) × 2j` basis.
    pub w: DMatrix<f64>,
    /// `H W`, same shape as `w`.
    pub hw: DMatrix<f64>,
    /// `Ω₁, …`
    pub omegas: Vec<Matrix2<f64>>,
    /// `Ψ₁, Ψ₂, …` where `H w₁ Ψ₁ᵀ = B`.
    pub psis: Vec<Matrix2<f64>>,
    pub status: BlockLanczosStatus,
}

impl BlockLanczosBasis {
    pub fn blocks(&self) -> usize {
        self.w.ncols() / 2
    }

    /// The `2(k+1) × 2k` block-tridiagonal `Fₖ₊₁,ₖ`.
    pub fn f_matrix(&self, k: usize) -> DMatrix<f64> {
        let mut f = DMatrix::zeros(2 * k + 2, 2 * k);
        for j in 0..k {
            f.view_mut((2 * j, 2 * j), (2, 2)).copy_from(&self.omegas[j]);
            f.view_mut((2 * j + 2, 2 * j), (2, 2)).copy_from(&self.psis[j + 1].transpose());
            if j > 0 {
                f.view_mut((2 * j - 2, 2 * j), (2, 2)).copy_from(&self.psis[j]);
            }
        }
        f
    }
}

/// Runs `k` block steps of the preconditioned block-Lanczos process.
///
/// Each new block comes from a Gram–Schmidt QR of the residual block in the
/// `H⁻¹` inner product, `Hwⱼ₊₁ Ψⱼ₊₁ᵀ = Res`, with `Ψⱼ₊₁ᵀ` upper triangular
/// with positive diagonal. A diagonal entry below `1e-10` relative to the
/// size of `K wⱼ` is a block breakdown.
pub fn block_lanczos_reference(
    k_mat: &DMatrix<f64>,
    b_block: &DMatrix<f64>,
    h_inv: &OperatorHandle,
    steps: usize,
) -> Result<BlockLanczosBasis> {
    let dim = k_mat.nrows();
    check_len("block_lanczos K", dim, k_mat.ncols())?;
    check_len("block_lanczos B rows", dim, b_block.nrows())?;
    check_len("block_lanczos B cols", 2, b_block.ncols())?;
    check_len("block_lanczos H⁻¹", dim, h_inv.nrows())?;

    let scale0 = b_block.norm();
    let (hw1, w1, r) = match h_orthonormalize(b_block, h_inv, 1e-10 * scale0) {
        Some(t) => t,
        None => return Err(Error::InvalidArgument("starting block is rank deficient".into())),
    };
    let mut w_cols = vec![w1];
    let mut hw_cols = vec![hw1];
    let mut omegas = Vec::new();
    let mut psis = vec![r.transpose()];
    let mut status = BlockLanczosStatus::Completed;

    for j in 0..steps {
        let wj = &w_cols[j];
        let kw = k_mat * wj;
        let omega: Matrix2<f64> = fixed2(&(wj.transpose() * &kw));
        let mut res = &kw - &hw_cols[j] * DMatrix::from_column_slice(2, 2, omega.as_slice());
        if j > 0 {
            res -= &hw_cols[j - 1] * DMatrix::from_column_slice(2, 2, psis[j].as_slice());
        }
        omegas.push(omega);
        match h_orthonormalize(&res, h_inv, 1e-10 * kw.norm().max(f64::MIN_POSITIVE)) {
            Some((hw, w, r)) => {
                psis.push(r.transpose());
                w_cols.push(w);
                hw_cols.push(hw);
            }
            None => {
                status = BlockLanczosStatus::BlockBreakdown { step: j + 2 };
                break;
            }
        }
    }

    let cols = 2 * w_cols.len();
    let mut w = DMatrix::zeros(dim, cols);
    let mut hw = DMatrix::zeros(dim, cols);
    for (j, (a, b)) in w_cols.iter().zip(&hw_cols).enumerate() {
        w.view_mut((0, 2 * j), (dim, 2)).copy_from(a);
        hw.view_mut((0, 2 * j), (dim, 2)).copy_from(b);
    }
    Ok(BlockLanczosBasis {
        w,
        hw,
        omegas,
        psis,
        status,
    })
}

fn fixed2(m: &DMatrix<f64>) -> Matrix2<f64> {
    Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

// Returns (Hw, w, R) with Hw·R = res, wᵀHw = I, R upper triangular with
// positive diagonal; None if a diagonal of R is at or below `tol`.
fn h_orthonormalize(
    res: &DMatrix<f64>,
    h_inv: &OperatorHandle,
    tol: f64,
) -> Option<(DMatrix<f64>, DMatrix<f64>, Matrix2<f64>)> {
    let dim = res.nrows();
    let apply = |col: &[f64]| {
        let mut out = vec![0.0; dim];
        h_inv.gemv_unchecked(col, 0.0, &mut out);
        out
    };
    let r0: Vec<f64> = res.column(0).iter().copied().collect();
    let r1: Vec<f64> = res.column(1).iter().copied().collect();
    let z0 = apply(&r0);
    let z1 = apply(&r1);
    let g00 = crate::vector::dot(&r0, &z0);
    let g01 = crate::vector::dot(&r0, &z1);
    let g11 = crate::vector::dot(&r1, &z1);
    let r11 = g00.max(0.0).sqrt();
    if r11 <= tol {
        return None;
    }
    let r12 = g01 / r11;
    let r22 = (g11 - r12 * r12).max(0.0).sqrt();
    if r22 <= tol {
        return None;
    }
    let mut hw = DMatrix::zeros(dim, 2);
    let mut w = DMatrix::zeros(dim, 2);
    for i in 0..dim {
        let h0 = r0[i] / r11;
        let w0 = z0[i] / r11;
        hw[(i, 0)] = h0;
        w[(i, 0)] = w0;
        hw[(i, 1)] = (r1[i] - r12 * h0) / r22;
        w[(i, 1)] = (z1[i] - r12 * w0) / r22;
    }
    Some((hw, w, Matrix2::new(r11, r12, 0.0, r22)))
}
