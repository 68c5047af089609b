use crate::error::Result;
use crate::problem::{stopping_check, SolverOptions};
use crate::report::{SolveReport, Status};
use crate::vector::axpy;

use super::{exhausted_message, FullSystemView, Lanczos, Run};

/// Preconditioned MINRES on `K z = (b, c)` with preconditioner `H`.
///
/// The history holds `‖rₖ‖_{H⁻¹}`, the same quantity TriMR minimizes, so
/// residual curves and iteration counts are directly comparable.
///
/// ```
/// use nalgebra::DMatrix;
/// use sqd_krylov::{minres_solve, DenseVector, FullSystemView, OperatorHandle, SolverOptions, SqdProblem};
///
/// let a = OperatorHandle::from_dense(DMatrix::from_element(1, 1, 2.0));
/// let p = SqdProblem::new(a, DenseVector::new(vec![3.0])?, DenseVector::new(vec![4.0])?)?;
/// let r = minres_solve(&FullSystemView::new(&p)?, &SolverOptions::default())?;
/// assert!(r.converged() && r.iterations <= 2);
/// assert!((r.x[0] - 2.2).abs() < 1e-12 && (r.y[0] - 0.4).abs() < 1e-12);
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
pub fn minres_solve(view: &FullSystemView, opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    let mut lz = Lanczos::new(view)?;
    let mut run = Run::new(view, opts, lz.beta1);
    let d = view.dim();
    let mut z = vec![0.0; d];
    if stopping_check(lz.beta1, (lz.beta1, 0.0), opts) {
        return Ok(run.finish(Status::Converged, z, None));
    }

    // QR of T_{k+1,k} by reflections [[c, s], [s, −c]]; c = −1 seeds the
    // first column so that γ̄₁ = α₁.
    let (mut cs, mut sn) = (-1.0, 0.0);
    let (mut dbar, mut epsln) = (0.0, 0.0);
    let mut phibar = lz.beta1;
    let mut w = vec![0.0; d];
    let mut w1 = vec![0.0; d];
    let mut w2 = vec![0.0; d];

    for k in 1..=run.maxit() {
        let (alpha, beta_next) = match lz.step(view) {
            Ok(t) => t,
            Err(e) => return Ok(run.finish(Status::Error, z, Some(e.to_string()))),
        };
        let oldeps = epsln;
        let delta = cs * dbar + sn * alpha;
        let gbar = sn * dbar - cs * alpha;
        epsln = sn * beta_next;
        dbar = -cs * beta_next;

        let gamma = gbar.hypot(beta_next);
        if gamma == 0.0 {
            let msg = format!("singular tridiagonal at k = {k}");
            return Ok(run.finish(Status::Error, z, Some(msg)));
        }
        cs = gbar / gamma;
        sn = beta_next / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        // w ← (vₖ − ε wₖ₋₂ − δ wₖ₋₁)/γ, keeping the last two.
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        let inv = 1.0 / gamma;
        for (((wi, &v), &a), &b) in w.iter_mut().zip(lz.v_prev()).zip(w1.iter()).zip(w2.iter()) {
            *wi = (v - oldeps * a - delta * b) * inv;
        }
        axpy(phi, &w, &mut z);

        let rnorm = phibar.abs();
        if run.record(rnorm, &z)? {
            return Ok(run.finish(Status::Converged, z, None));
        }
        if lz.exhausted {
            let r = *run.history.last().unwrap();
            return Ok(run.finish(Status::BreakdownTerminated, z, Some(exhausted_message(k, r))));
        }
    }
    Ok(run.finish(Status::MaxIterations, z, None))
}
