//! TriMR: the iterate minimizing `‖rₖ‖_{H⁻¹}` over the block Krylov space.
//!
//! The QR factorization `Sₖ₊₁,ₖ = Qₖ[Rₖ; 0]` is updated with four symmetric
//! reflections per iteration. `Rₖ` is upper triangular with five nonzero
//! diagonals, named after their offset from the main one:
//!
//! ```text
//! row i:  δᵢ (i, i)   σᵢ (i, i+1)   ηᵢ (i, i+2)   λᵢ (i, i+3)   μᵢ (i, i+4)
//! ```
//!
//! At iteration `k` the reflections act on rows
//!
//! ```text
//! R1: (2k, 2k+2)   R2: (2k−1, 2k)   R3: (2k, 2k+2)   R4: (2k, 2k+1)
//! ```
//!
//! Rows `2k−1` and `2k` of the columns `2k+1`, `2k+2` are only final after
//! the next iteration has applied these four reflections to them, so they
//! are carried as "bar" values.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::givens::{sym_givens, GivensPair};
use crate::problem::{stopping_check, Sign, SolverOptions, SqdProblem};
use crate::report::{SolveReport, Status};
use crate::ssy::{SsyProcess, StorageReport};
use crate::vector::DenseVector;

/// Two finished columns of `Rₖ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrColumns {
    /// Column `2k−1`: `[μ₂ₖ₋₅, λ₂ₖ₋₄, η₂ₖ₋₃, σ₂ₖ₋₂, δ₂ₖ₋₁]`, rows `2k−5..=2k−1`.
    pub odd: [f64; 5],
    /// Column `2k`: `[μ₂ₖ₋₄, λ₂ₖ₋₃, η₂ₖ₋₂, σ₂ₖ₋₁, δ₂ₖ]`, rows `2k−4..=2k`.
    pub even: [f64; 5],
    /// The reflections of this iteration, in application order.
    pub reflections: [GivensPair; 4],
}

/// Streaming QR factorization of `Sₖ₊₁,ₖ`.
#[derive(Debug, Clone)]
pub struct StreamingQr {
    tau: f64,
    nu: f64,
    k: usize,
    refl: [GivensPair; 4],
    // η̄₂ₖ₋₃, λ̄₂ₖ₋₃ and σ̄₂ₖ₋₂ for the columns of the next iteration.
    eta_bar: f64,
    lambda_bar: f64,
    sigma_bar: f64,
    // Entries of the next columns finalized one iteration early:
    // μ₂ₖ₋₅, λ₂ₖ₋₄ (column 2k−1) and μ₂ₖ₋₄ (column 2k).
    mu_odd: f64,
    lambda_odd: f64,
    mu_even: f64,
}

impl StreamingQr {
    pub fn new(tau: Sign, nu: Sign) -> Self {
        Self {
            tau: tau.value(),
            nu: nu.value(),
            k: 0,
            refl: [GivensPair::IDENTITY; 4],
            eta_bar: 0.0,
            lambda_bar: 0.0,
            sigma_bar: 0.0,
            mu_odd: 0.0,
            lambda_odd: 0.0,
            mu_even: 0.0,
        }
    }

    /// Iterations completed so far.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Consumes `αₖ`, `βₖ₊₁`, `γₖ₊₁` and returns columns `2k−1`, `2k` of `Rₖ`.
    pub fn step(&mut self, alpha: f64, beta_next: f64, gamma_next: f64) -> QrColumns {
        self.k += 1;
        let (tau, nu) = (self.tau, self.nu);

        // Rows 2k−3..2k of columns 2k−1..2k+2, before and after the previous
        // iteration's reflections.
        let (odd_head, even_head, row_odd, row_even) = if self.k == 1 {
            (
                [0.0; 4],
                [0.0; 4],
                [tau, alpha, 0.0, gamma_next],
                [alpha, nu, beta_next, 0.0],
            )
        } else {
            let mut b = [
                [self.eta_bar, self.lambda_bar, 0.0, 0.0],
                [self.sigma_bar, 0.0, 0.0, 0.0],
                [tau, alpha, 0.0, gamma_next],
                [alpha, nu, beta_next, 0.0],
            ];
            let [r1, r2, r3, r4] = self.refl;
            reflect_rows(&mut b, 1, 3, r1);
            reflect_rows(&mut b, 0, 1, r2);
            reflect_rows(&mut b, 1, 3, r3);
            reflect_rows(&mut b, 1, 2, r4);
            let odd_head = [self.mu_odd, self.lambda_odd, b[0][0], b[1][0]];
            let even_head = [self.mu_even, b[0][1], b[1][1], 0.0];
            // μ₂ₖ₋₃ and λ₂ₖ₋₂ sit in column 2k+1, μ₂ₖ₋₂ in column 2k+2.
            self.mu_odd = b[0][2];
            self.lambda_odd = b[1][2];
            self.mu_even = b[1][3];
            (odd_head, even_head, b[2], b[3])
        };
        if self.k == 1 {
            self.mu_odd = 0.0;
            self.lambda_odd = 0.0;
            self.mu_even = 0.0;
        }
        let [delta_bar_odd, sigma_bar_odd, eta_bar_odd, lambda_bar_odd] = row_odd;
        let [theta_bar, delta_bar_even, sigma_bar_even, _] = row_even;

        // R1 removes γₖ₊₁ (row 2k+2) from column 2k−1 against θ̄ₖ.
        let (r1, theta) = sym_givens(theta_bar, gamma_next);
        let (delta_tilde, g) = r1.apply(delta_bar_even, 0.0);
        // R2 removes θₖ (row 2k) from column 2k−1 against δ̄₂ₖ₋₁.
        let (r2, delta_odd) = sym_givens(delta_bar_odd, theta);
        let (sigma_odd, delta_hat) = r2.apply(sigma_bar_odd, delta_tilde);
        // R3 removes the fill-in g (row 2k+2) from column 2k.
        let (r3, delta_ring) = sym_givens(delta_hat, g);
        // R4 removes βₖ₊₁ (row 2k+1) from column 2k.
        let (r4, delta_even) = sym_givens(delta_ring, beta_next);

        self.refl = [r1, r2, r3, r4];
        self.eta_bar = eta_bar_odd;
        self.lambda_bar = lambda_bar_odd;
        self.sigma_bar = sigma_bar_even;

        QrColumns {
            odd: [odd_head[0], odd_head[1], odd_head[2], odd_head[3], delta_odd],
            even: [even_head[0], even_head[1], even_head[2], sigma_odd, delta_even],
            reflections: self.refl,
        }
    }

    pub fn last_reflections(&self) -> [GivensPair; 4] {
        self.refl
    }
}

#[inline]
fn reflect_rows(b: &mut [[f64; 4]; 4], i: usize, j: usize, g: GivensPair) {
    for col in 0..4 {
        let (x, y) = g.apply(b[i][col], b[j][col]);
        b[i][col] = x;
        b[j][col] = y;
    }
}

/// Result of pushing `p̄ₖ₋₁` through the four reflections of iteration `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiBarUpdate {
    /// `π₂ₖ₋₁`
    pub pi_odd: f64,
    /// `π₂ₖ`
    pub pi_even: f64,
    /// `π̄₂ₖ₊₁`
    pub pibar_odd: f64,
    /// `π̄₂ₖ₊₂`
    pub pibar_even: f64,
}

impl PiBarUpdate {
    /// `‖rₖ‖_{H⁻¹} = √(π̄₂ₖ₊₁² + π̄₂ₖ₊₂²)`
    pub fn rnorm(&self) -> f64 {
        self.pibar_odd.hypot(self.pibar_even)
    }
}

/// Applies the reflections of iteration `k` to `(π̄₂ₖ₋₁, π̄₂ₖ, 0, 0)`.
///
/// Starts from `p̄₀ = (β₁, γ₁)`.
///
/// ```
/// use sqd_krylov::{trimr_pbar_update, GivensPair};
///
/// let id = [GivensPair::IDENTITY; 4];
/// let u = trimr_pbar_update(&id, 3.0, 4.0);
/// // The reflection [[1, 0], [0, −1]] flips the sign of its second row.
/// assert_eq!((u.pi_odd, u.pi_even, u.pibar_odd, u.pibar_even), (3.0, -4.0, 0.0, 0.0));
/// ```
pub fn trimr_pbar_update(refl: &[GivensPair; 4], pibar_odd: f64, pibar_even: f64) -> PiBarUpdate {
    let [r1, r2, r3, r4] = *refl;
    let (pi_tilde, pi_tilde_next) = r1.apply(pibar_even, 0.0);
    let (pi_odd, pi_hat) = r2.apply(pibar_odd, pi_tilde);
    let (pi_ring, pibar_even_next) = r3.apply(pi_hat, pi_tilde_next);
    let (pi_even, pibar_odd_next) = r4.apply(pi_ring, 0.0);
    PiBarUpdate {
        pi_odd,
        pi_even,
        pibar_odd: pibar_odd_next,
        pibar_even: pibar_even_next,
    }
}

/// Everything produced by one TriMR iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriMrStep {
    pub k: usize,
    pub alpha: f64,
    pub beta_next: f64,
    pub gamma_next: f64,
    pub columns: QrColumns,
    pub pi: PiBarUpdate,
    /// Recurrence value of `‖rₖ‖_{H⁻¹}`.
    pub rnorm: f64,
    pub terminated: bool,
}

/// TriMR workspace. Drive it with [`TriMr::step`] or use [`trimr_solve`].
#[derive(Debug, Clone)]
pub struct TriMr {
    ssy: SsyProcess,
    qr: StreamingQr,
    pibar: (f64, f64),
    // Ring of g₂ₖ₋₅..g₂ₖ₋₂ starting at `base`; after an update the two
    // oldest slots hold g₂ₖ₋₁, g₂ₖ and `base` moves by two.
    gx: [Vec<f64>; 4],
    gy: [Vec<f64>; 4],
    base: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    rnorm: f64,
}

impl TriMr {
    pub fn new(problem: &SqdProblem, opts: &SolverOptions) -> Result<Self> {
        opts.validate()?;
        let ssy = SsyProcess::new(problem, opts.breakdown_tol_factor)?;
        let (m, n) = problem.dims();
        let pibar = (ssy.beta1(), ssy.gamma1());
        Ok(Self {
            qr: StreamingQr::new(problem.tau(), problem.nu()),
            rnorm: pibar.0.hypot(pibar.1),
            ssy,
            pibar,
            gx: std::array::from_fn(|_| vec![0.0; m]),
            gy: std::array::from_fn(|_| vec![0.0; n]),
            base: 0,
            x: vec![0.0; m],
            y: vec![0.0; n],
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

    pub fn process(&self) -> &SsyProcess {
        &self.ssy
    }

    pub fn last_reflections(&self) -> [GivensPair; 4] {
        self.qr.last_reflections()
    }

    /// `(gˣ₂ₖ₋₁, gˣ₂ₖ)` and `(gʸ₂ₖ₋₁, gʸ₂ₖ)` of the last iteration.
    pub fn directions(&self) -> ([&[f64]; 2], [&[f64]; 2]) {
        let (o, e) = ((self.base + 2) % 4, (self.base + 3) % 4);
        ([&self.gx[o], &self.gx[e]], [&self.gy[o], &self.gy[e]])
    }

    /// Persistent vectors: the tridiagonalization's two per block, the
    /// iterate and four directions per block.
    pub fn storage(&self) -> StorageReport {
        self.ssy.storage()
            + StorageReport {
                m_vectors: 1 + self.gx.len(),
                n_vectors: 1 + self.gy.len(),
                ..Default::default()
            }
    }

    pub fn step(&mut self) -> Result<TriMrStep> {
        let st = self.ssy.step()?;
        let k = self.ssy.k();
        let cols = self.qr.step(st.alpha, st.beta_next, st.gamma_next);
        let mut pi = trimr_pbar_update(&cols.reflections, self.pibar.0, self.pibar.1);
        // With ν = 0 and an exhausted u block, column 2k of Sₖ₊₁,ₖ is exactly
        // zero. Its coefficient is dropped and its share of the right-hand
        // side stays in the residual.
        let zero_even = cols.even.iter().all(|&e| e == 0.0);
        let unfitted = if zero_even { std::mem::replace(&mut pi.pi_even, 0.0) } else { 0.0 };
        let (d_odd, d_even) = (cols.odd[4], if zero_even { 1.0 } else { cols.even[4] });
        if !(d_odd > 0.0 && d_even > 0.0) || !(pi.pi_odd.is_finite() && pi.pi_even.is_finite()) {
            return Err(Error::PivotUnderflow {
                step: if d_odd > 0.0 { 2 * k } else { 2 * k - 1 },
                value: d_odd.min(d_even),
            });
        }
        self.update_directions(&cols, pi.pi_odd, pi.pi_even);
        self.pibar = (pi.pibar_odd, pi.pibar_even);
        self.rnorm = pi.rnorm().hypot(unfitted);
        Ok(TriMrStep {
            k,
            alpha: st.alpha,
            beta_next: st.beta_next,
            gamma_next: st.gamma_next,
            columns: cols,
            pi,
            rnorm: self.rnorm,
            terminated: st.terminated,
        })
    }

    // g₂ₖ₋₁ = (w₂ₖ₋₁ − μg₂ₖ₋₅ − λg₂ₖ₋₄ − ηg₂ₖ₋₃ − σg₂ₖ₋₂)/δ₂ₖ₋₁
    // g₂ₖ   = (w₂ₖ   − μg₂ₖ₋₄ − λg₂ₖ₋₃ − ηg₂ₖ₋₂ − σg₂ₖ₋₁)/δ₂ₖ
    // with w₂ₖ₋₁ = (vₖ, 0) and w₂ₖ = (0, uₖ).
    fn update_directions(&mut self, cols: &QrColumns, pi_odd: f64, pi_even: f64) {
        let base = self.base;
        let upd = Update {
            odd: cols.odd,
            even: cols.even,
            pi_odd,
            pi_even,
        };
        let [a, b, c, d] = &mut self.gx;
        let ring = order(base, a, b, c, d);
        upd.apply(ring, Some(self.ssy.v_prev()), None, &mut self.x);
        let [a, b, c, d] = &mut self.gy;
        let ring = order(base, a, b, c, d);
        upd.apply(ring, None, Some(self.ssy.u_prev()), &mut self.y);
        self.base = (base + 2) % 4;
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

type Ring<'a> = [&'a mut Vec<f64>; 4];

fn order<'a>(base: usize, a: &'a mut Vec<f64>, b: &'a mut Vec<f64>, c: &'a mut Vec<f64>, d: &'a mut Vec<f64>) -> Ring<'a> {
    if base == 0 {
        [a, b, c, d]
    } else {
        [c, d, a, b]
    }
}

struct Update {
    odd: [f64; 5],
    even: [f64; 5],
    pi_odd: f64,
    pi_even: f64,
}

impl Update {
    fn apply(&self, ring: Ring<'_>, w_odd: Option<&[f64]>, w_even: Option<&[f64]>, sol: &mut [f64]) {
        let [g5, g4, g3, g2] = ring;
        let [mo, lo, eo, so, dof] = self.odd;
        let [me, le, ee, se, dev] = self.even;
        let io = 1.0 / dof;
        let ie = if dev == 0.0 { 0.0 } else { 1.0 / dev };
        for i in 0..sol.len() {
            let (a, b, c, d) = (g5[i], g4[i], g3[i], g2[i]);
            let wo = w_odd.map_or(0.0, |w| w[i]);
            let we = w_even.map_or(0.0, |w| w[i]);
            let odd = (wo - mo * a - lo * b - eo * c - so * d) * io;
            let even = (we - me * b - le * c - ee * d - se * odd) * ie;
            g5[i] = odd;
            g4[i] = even;
            sol[i] += self.pi_odd * odd + self.pi_even * even;
        }
    }
}

/// Solves the system with TriMR. Accepts `τ ∈ {±1}` and `ν ∈ {+1, 0, −1}`;
/// `ν = 0` is the saddle-point case, where `N⁻¹` may be any SPD operator.
///
/// Error handling follows [`tricg_solve`](crate::tricg_solve).
///
/// ```
/// use nalgebra::DMatrix;
/// use sqd_krylov::{trimr_solve, DenseVector, OperatorHandle, SolverOptions, SqdProblem};
///
/// let a = OperatorHandle::from_dense(DMatrix::zeros(2, 2));
/// let p = SqdProblem::new(a, DenseVector::new(vec![1.0, 2.0])?, DenseVector::new(vec![3.0, 4.0])?)?;
/// let r = trimr_solve(&p, &SolverOptions::default())?;
/// assert_eq!(r.iterations, 1);
/// assert!((r.y[0] + 3.0).abs() < 1e-15 && (r.y[1] + 4.0).abs() < 1e-15);
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
pub fn trimr_solve(problem: &SqdProblem, opts: &SolverOptions) -> Result<SolveReport> {
    let start = Instant::now();
    if opts.explicit_residual {
        problem.require_forward()?;
    }
    let mut ws = TriMr::new(problem, opts)?;
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
