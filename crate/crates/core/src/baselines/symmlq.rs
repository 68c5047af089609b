use crate::error::Result;
use crate::problem::{stopping_check, SolverOptions};
use crate::report::{SolveReport, Status};
use crate::vector::axpy;

use super::{exhausted_message, FullSystemView, Lanczos, Run};

/// Preconditioned SYMMLQ on `K z = (b, c)` with preconditioner `H`, with
/// transfer to the CG point.
///
/// SYMMLQ iterates come from an LQ factorization `Tₖ = L̄ₖPₖᵀ`. Whenever the
/// last diagonal `γ̄ₖ` of `L̄ₖ` exceeds `√eps` times the running estimate of
/// `‖Tₖ‖`, the CG iterate is one cheap step away. It is then the reported
/// point and its `‖rₖ‖_{H⁻¹}` goes into the history. Otherwise the SYMMLQ
/// point and its residual are reported.
///
/// ```
/// use nalgebra::DMatrix;
/// use sqd_krylov::{symmlq_solve, DenseVector, FullSystemView, OperatorHandle, SolverOptions, SqdProblem};
///
/// let a = OperatorHandle::from_dense(DMatrix::from_element(1, 1, 2.0));
/// let p = SqdProblem::new(a, DenseVector::new(vec![3.0])?, DenseVector::new(vec![4.0])?)?;
/// let r = symmlq_solve(&FullSystemView::new(&p)?, &SolverOptions::default())?;
/// assert!(r.converged() && r.iterations <= 2);
/// assert!((r.x[0] - 2.2).abs() < 1e-12 && (r.y[0] - 0.4).abs() < 1e-12);
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
pub fn symmlq_solve(view: &FullSystemView, opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    let mut lz = Lanczos::new(view)?;
    let mut run = Run::new(view, opts, lz.beta1);
    let d = view.dim();
    let mut z = vec![0.0; d];
    if stopping_check(lz.beta1, (lz.beta1, 0.0), opts) {
        return Ok(run.finish(Status::Converged, z, None));
    }

    // Rotation k−1 as [[c, s], [s, −c]]; c = −1 makes γ̄₁ = α₁.
    let (mut cs, mut sn) = (-1.0, 0.0);
    let (mut dbar, mut epsln) = (0.0, 0.0);
    // ζₖ₋₁, ζₖ₋₂
    let (mut zeta1, mut zeta2) = (0.0, 0.0);
    let mut wbar = lz.v_curr().to_vec();
    let mut point = vec![0.0; d];

    for k in 1..=run.maxit() {
        let (alpha, beta_next) = match lz.step(view) {
            Ok(t) => t,
            Err(e) => return Ok(run.finish(Status::Error, z, Some(e.to_string()))),
        };
        // Row k of L̄ₖ: εₖ, δₖ, γ̄ₖ.
        let eps_k = epsln;
        let delta = cs * dbar + sn * alpha;
        let gbar = sn * dbar - cs * alpha;
        epsln = sn * beta_next;
        dbar = -cs * beta_next;

        let rhs = if k == 1 { lz.beta1 } else { 0.0 };
        let num = rhs - delta * zeta1 - eps_k * zeta2;
        let transfer = gbar.abs() > f64::EPSILON.sqrt() * lz.est;

        point.copy_from_slice(&z);
        let rnorm = if transfer {
            let zbar = num / gbar;
            axpy(zbar, &wbar, &mut point);
            beta_next * (sn * zeta1 - cs * zbar).abs()
        } else {
            (eps_k * zeta2 + delta * zeta1).hypot(beta_next * sn * zeta1)
        };
        if run.record(rnorm, &point)? {
            return Ok(run.finish(Status::Converged, point, None));
        }
        if lz.exhausted {
            let r = *run.history.last().unwrap();
            return Ok(run.finish(Status::BreakdownTerminated, point, Some(exhausted_message(k, r))));
        }

        // Rotation k removes βₖ₊₁ from row k.
        let gamma = gbar.hypot(beta_next);
        cs = gbar / gamma;
        sn = beta_next / gamma;
        let zeta = num / gamma;
        // wₖ = c w̄ₖ + s vₖ₊₁,  w̄ₖ₊₁ = s w̄ₖ − c vₖ₊₁
        for ((zi, wb), &v) in z.iter_mut().zip(wbar.iter_mut()).zip(lz.v_curr()) {
            let w = cs * *wb + sn * v;
            *wb = sn * *wb - cs * v;
            *zi += zeta * w;
        }
        zeta2 = zeta1;
        zeta1 = zeta;
    }
    Ok(run.finish(Status::MaxIterations, point, None))
}
