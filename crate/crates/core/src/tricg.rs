//! TriCG: the Galerkin iterate on the block Krylov space, through an LDLᵀ
//! factorization of `Sₖ` that is updated two columns per iteration.
//!
//! With `Sₖ = LₖDₖLₖᵀ`, `Gₖ = WₖLₖ⁻ᵀ` and `LₖDₖpₖ = β₁e₁ + γ₁e₂`, the
//! iterate is `(xₖ, yₖ) = Gₖpₖ`. Each iteration appends two pivots
//! `d₂ₖ₋₁, d₂ₖ`, one row of `L` (`σₖ, ηₖ, λₖ, δₖ`), two entries of `pₖ` and
//! two direction vectors per block.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::problem::{stopping_check, Sign, SolverOptions, SqdProblem};
use crate::report::{SolveReport, Status};
use crate::ssy::{SsyProcess, StorageReport};
use crate::vector::DenseVector;

/// Entries of `Lₖ` and `Dₖ` produced at iteration `k`.
///
/// Row `2k−1` of `L` holds `σₖ` at column `2k−2`; row `2k` holds `ηₖ`,
/// `λₖ`, `δₖ` at columns `2k−3`, `2k−2`, `2k−1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LdltScalars {
    pub d_odd: f64,
    pub d_even: f64,
    pub delta: f64,
    pub sigma: f64,
    pub eta: f64,
    pub lambda: f64,
}

/// The two pivots carried between iterations: `(d₂ₖ₋₃, d₂ₖ₋₂)`. Zero before
/// the first iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LdltHistory {
    pub d_prevprev: f64,
    pub d_prev: f64,
    pub delta_prev: f64,
}

/// Appends two columns to `LₖDₖLₖᵀ = Sₖ`.
///
/// `beta_k`, `gamma_k` are `βₖ`, `γₖ` (ignored at `k = 1`). Fails with a
/// pivot error when `|d| < pivot_tol`.
///
/// ```
/// use sqd_krylov::{ldlt_step, LdltHistory, Sign};
///
/// let s = ldlt_step(&LdltHistory::default(), 2.0, 0.0, 0.0, 1, Sign::Plus, Sign::Minus, 0.0)?;
/// assert_eq!((s.d_odd, s.delta, s.d_even), (1.0, 2.0, -5.0));
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
#[allow(clippy::too_many_arguments)]
pub fn ldlt_step(
    hist: &LdltHistory,
    alpha_k: f64,
    beta_k: f64,
    gamma_k: f64,
    k: usize,
    tau: Sign,
    nu: Sign,
    pivot_tol: f64,
) -> Result<LdltScalars> {
    let (tau, nu) = (tau.value(), nu.value());
    let (mut sigma, mut eta, mut lambda) = (0.0, 0.0, 0.0);
    if k >= 2 {
        sigma = beta_k / hist.d_prev;
        eta = gamma_k / hist.d_prevprev;
        lambda = -eta * hist.delta_prev * hist.d_prevprev / hist.d_prev;
    }
    let d_odd = tau - sigma * sigma * hist.d_prev;
    check_pivot(d_odd, 2 * k - 1, pivot_tol)?;
    let delta = (alpha_k - lambda * sigma * hist.d_prev) / d_odd;
    let d_even = nu - eta * eta * hist.d_prevprev - lambda * lambda * hist.d_prev - delta * delta * d_odd;
    check_pivot(d_even, 2 * k, pivot_tol)?;
    Ok(LdltScalars {
        d_odd,
        d_even,
        delta,
        sigma,
        eta,
        lambda,
    })
}

fn check_pivot(d: f64, step: usize, tol: f64) -> Result<()> {
    if !d.is_finite() || d.abs() < tol || d == 0.0 {
        Err(Error::PivotUnderflow { step, value: d.abs() })
    } else {
        Ok(())
    }
}

/// The last three entries of `pₖ` and `d₂ₖ₋₃` needed by the next update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PiHistory {
    /// `π₂ₖ₋₃`
    pub pi_prevprev: f64,
    /// `π₂ₖ₋₂`
    pub pi_prev: f64,
    /// `d₂ₖ₋₃`
    pub d_prevprev: f64,
    /// `d₂ₖ₋₂`
    pub d_prev: f64,
}

/// `(π₂ₖ₋₁, π₂ₖ)` from the forward solve `LₖDₖpₖ = β₁e₁ + γ₁e₂`.
///
/// ```
/// use sqd_krylov::{tricg_pi_update, LdltScalars, PiHistory};
///
/// let s = LdltScalars { d_odd: 1.0, d_even: -5.0, delta: 2.0, ..Default::default() };
/// let (p1, p2) = tricg_pi_update(&s, &PiHistory::default(), 3.0, 4.0, 1);
/// assert_eq!(p1, 3.0);
/// assert!((p2 - 0.4).abs() < 1e-16);
/// ```
pub fn tricg_pi_update(s: &LdltScalars, hist: &PiHistory, beta1: f64, gamma1: f64, k: usize) -> (f64, f64) {
    if k == 1 {
        let pi1 = beta1 / s.d_odd;
        let pi2 = (gamma1 - s.delta * beta1) / s.d_even;
        return (pi1, pi2);
    }
    let pi_odd = -s.sigma * hist.d_prev * hist.pi_prev / s.d_odd;
    let pi_even = -(s.delta * s.d_odd * pi_odd
        + s.lambda * hist.d_prev * hist.pi_prev
        + s.eta * hist.d_prevprev * hist.pi_prevprev)
        / s.d_even;
    (pi_odd, pi_even)
}

/// `‖rₖ‖_{H⁻¹} = √(γₖ₊₁²(π₂ₖ₋₁ − δₖπ₂ₖ)² + βₖ₊₁²π₂ₖ²)`.
pub fn tricg_residual_norm(pi_odd: f64, pi_even: f64, delta: f64, beta_next: f64, gamma_next: f64) -> f64 {
    (gamma_next * (pi_odd - delta * pi_even)).hypot(beta_next * pi_even)
}

/// Everything produced by one TriCG iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriCgStep {
    pub k: usize,
    pub alpha: f64,
    pub beta_next: f64,
    pub gamma_next: f64,
    pub ldlt: LdltScalars,
    pub pi_odd: f64,
    pub pi_even: f64,
    /// Recurrence value of `‖rₖ‖_{H⁻¹}`.
    pub rnorm: f64,
    pub terminated: bool,
}

/// TriCG workspace. Drive it with [`TriCg::step`] or use [`tricg_solve`].
#[derive(Debug, Clone)]
pub struct TriCg {
    ssy: SsyProcess,
    tau: Sign,
    nu: Sign,
    ldlt: LdltHistory,
    pi: PiHistory,
    // gˣ₂ₖ₋₃/gˣ₂ₖ₋₂ before an update, gˣ₂ₖ₋₁/gˣ₂ₖ after it.
    gx: [Vec<f64>; 2],
    gy: [Vec<f64>; 2],
    x: Vec<f64>,
    y: Vec<f64>,
    rnorm: f64,
    // (βₖ, γₖ) for the next step; unused at k = 1.
    last: (f64, f64),
    pivot_scale: f64,
}

impl TriCg {
    /// Starts the tridiagonalization. Requires `τν = −1`.
    pub fn new(problem: &SqdProblem, opts: &SolverOptions) -> Result<Self> {
        opts.validate()?;
        let (tau, nu) = (problem.tau(), problem.nu());
        if tau.as_i8() * nu.as_i8() != -1 {
            return Err(Error::UnsupportedSigns {
                solver: "TriCG",
                tau: tau.as_i8(),
                nu: nu.as_i8(),
            });
        }
        let ssy = SsyProcess::new(problem, opts.breakdown_tol_factor)?;
        let (m, n) = problem.dims();
        let rnorm = ssy.beta1().hypot(ssy.gamma1());
        Ok(Self {
            ssy,
            tau,
            nu,
            ldlt: LdltHistory::default(),
            pi: PiHistory::default(),
            gx: [vec![0.0; m], vec![0.0; m]],
            gy: [vec![0.0; n], vec![0.0; n]],
            x: vec![0.0; m],
            y: vec![0.0; n],
            rnorm,
            last: (0.0, 0.0),
            pivot_scale: 1.0,
        })
    }

    pub fn beta1(&self) -> f64 {
        self.ssy.beta1()
    }

    pub fn gamma1(&self) -> f64 {
        self.ssy.gamma1()
    }

    pub fn k(&self) -> usize {
        self.ssy.k()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn rnorm(&self) -> f64 {
        self.rnorm
    }

    pub fn is_terminated(&self) -> bool {
        self.ssy.is_terminated()
    }

    /// The underlying tridiagonalization, e.g. to read `vₖ₊₁`.
    pub fn process(&self) -> &SsyProcess {
        &self.ssy
    }

    /// Direction vectors `(gˣ₂ₖ₋₁, gˣ₂ₖ)` and `(gʸ₂ₖ₋₁, gʸ₂ₖ)` of the last
    /// iteration.
    pub fn directions(&self) -> ([&[f64]; 2], [&[f64]; 2]) {
        ([&self.gx[0], &self.gx[1]], [&self.gy[0], &self.gy[1]])
    }

    /// Persistent vectors: two per block in the tridiagonalization, plus the
    /// iterate and two directions per block.
    pub fn storage(&self) -> StorageReport {
        self.ssy.storage()
            + StorageReport {
                m_vectors: 1 + self.gx.len(),
                n_vectors: 1 + self.gy.len(),
                ..Default::default()
            }
    }

    pub fn step(&mut self) -> Result<TriCgStep> {
        let k = self.ssy.k() + 1;
        let (beta_k, gamma_k) = self.last;
        let st = self.ssy.step()?;
        self.pivot_scale = self.pivot_scale.max(st.alpha.abs() + beta_k + gamma_k);
        let pivot_tol = f64::EPSILON * self.pivot_scale;
        let s = ldlt_step(&self.ldlt, st.alpha, beta_k, gamma_k, k, self.tau, self.nu, pivot_tol)?;
        let (pi_odd, pi_even) = tricg_pi_update(&s, &self.pi, self.beta1(), self.gamma1(), k);
        if !(pi_odd.is_finite() && pi_even.is_finite()) {
            return Err(Error::NonFinite { index: 2 * k });
        }

        self.update_directions(&s, pi_odd, pi_even);

        self.ldlt = LdltHistory {
            d_prevprev: s.d_odd,
            d_prev: s.d_even,
            delta_prev: s.delta,
        };
        self.pi = PiHistory {
            pi_prevprev: pi_odd,
            pi_prev: pi_even,
            d_prevprev: s.d_odd,
            d_prev: s.d_even,
        };
        self.rnorm = tricg_residual_norm(pi_odd, pi_even, s.delta, st.beta_next, st.gamma_next);
        self.last = (st.beta_next, st.gamma_next);
        Ok(TriCgStep {
            k,
            alpha: st.alpha,
            beta_next: st.beta_next,
            gamma_next: st.gamma_next,
            ldlt: s,
            pi_odd,
            pi_even,
            rnorm: self.rnorm,
            terminated: st.terminated,
        })
    }

    // gˣ₂ₖ₋₁ = vₖ − σgˣ₂ₖ₋₂,   gˣ₂ₖ = −δgˣ₂ₖ₋₁ − λgˣ₂ₖ₋₂ − ηgˣ₂ₖ₋₃
    // gʸ₂ₖ₋₁ = −σgʸ₂ₖ₋₂,       gʸ₂ₖ = uₖ − δgʸ₂ₖ₋₁ − λgʸ₂ₖ₋₂ − ηgʸ₂ₖ₋₃
    // then x += π₂ₖ₋₁gˣ₂ₖ₋₁ + π₂ₖgˣ₂ₖ, likewise y; one pass per block.
    fn update_directions(&mut self, s: &LdltScalars, pi_odd: f64, pi_even: f64) {
        let (sigma, delta, lambda, eta) = (s.sigma, s.delta, s.lambda, s.eta);
        let vk = self.ssy.v_prev();
        let [g3, g2] = &mut self.gx;
        for (((a, b), x), &v) in g3.iter_mut().zip(g2.iter_mut()).zip(self.x.iter_mut()).zip(vk) {
            let odd = v - sigma * *b;
            let even = -delta * odd - lambda * *b - eta * *a;
            *a = odd;
            *b = even;
            *x += pi_odd * odd + pi_even * even;
        }
        let uk = self.ssy.u_prev();
        let [g3, g2] = &mut self.gy;
        for (((a, b), y), &u) in g3.iter_mut().zip(g2.iter_mut()).zip(self.y.iter_mut()).zip(uk) {
            let odd = -sigma * *b;
            let even = u - delta * odd - lambda * *b - eta * *a;
            *a = odd;
            *b = even;
            *y += pi_odd * odd + pi_even * even;
        }
    }

    fn into_report(self, status: Status, history: Vec<f64>, start: Instant, message: Option<String>) -> SolveReport {
        SolveReport {
            status,
            iterations: history.len() - 1,
            residual_history: history,
            x: DenseVector::from_vec_unchecked(self.x),
            y: DenseVector::from_vec_unchecked(self.y),
            elapsed: start.elapsed(),
            message,
        }
    }
}

/// Solves the SQD system with TriCG.
///
/// Setup problems (zero right-hand side block, unsupported signs,
/// indefinite preconditioner at start, missing forward operators for
/// explicit residuals) are returned as `Err`. Failures after the first
/// iteration produce a report with [`Status::Error`] and the last iterate.
///
/// ```
/// use nalgebra::DMatrix;
/// use sqd_krylov::{tricg_solve, DenseVector, OperatorHandle, SolverOptions, SqdProblem};
///
/// let a = OperatorHandle::from_dense(DMatrix::from_element(1, 1, 2.0));
/// let p = SqdProblem::new(a, DenseVector::new(vec![3.0])?, DenseVector::new(vec![4.0])?)?;
/// let r = tricg_solve(&p, &SolverOptions::default())?;
/// assert!(r.converged() && r.iterations == 1);
/// assert!((r.x[0] - 2.2).abs() < 1e-15 && (r.y[0] - 0.4).abs() < 1e-15);
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
pub fn tricg_solve(problem: &SqdProblem, opts: &SolverOptions) -> Result<SolveReport> {
    let start = Instant::now();
    if opts.explicit_residual {
        problem.require_forward()?;
    }
    let mut ws = TriCg::new(problem, opts)?;
    let (m, n) = problem.dims();
    let maxit = opts.max_iterations_for(m, n);
    let r0 = (ws.beta1(), ws.gamma1());
    let mut history = vec![ws.rnorm()];
    if stopping_check(ws.rnorm(), r0, opts) {
        return Ok(ws.into_report(Status::Converged, history, start, None));
    }
    for _ in 0..maxit {
        let st = match ws.step() {
            Ok(st) => st,
            Err(e) => return Ok(ws.into_report(Status::Error, history, start, Some(e.to_string()))),
        };
        let rnorm = if opts.explicit_residual {
            problem.explicit_residual(&ws.x, &ws.y)?
        } else {
            st.rnorm
        };
        history.push(rnorm);
        if stopping_check(rnorm, r0, opts) {
            return Ok(ws.into_report(Status::Converged, history, start, None));
        }
        if st.terminated {
            let msg = format!(
                "Krylov basis exhausted at k = {} (beta = {:e}, gamma = {:e}) with residual {:e}",
                st.k, st.beta_next, st.gamma_next, rnorm
            );
            return Ok(ws.into_report(Status::BreakdownTerminated, history, start, Some(msg)));
        }
    }
    Ok(ws.into_report(Status::MaxIterations, history, start, None))
}
