//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the lines show up in `cargo test` output.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::*;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use sqd_krylov::*;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: f64) -> std::result::Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || format!("took {elapsed:.2?}, limit {limit} s"))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn dense_a(p: &SqdProblem) -> DMatrix<f64> {
    p.a().to_dense()
}

fn dense_m(p: &SqdProblem) -> DMatrix<f64> {
    p.m_forward().unwrap().to_dense()
}

fn dense_n(p: &SqdProblem) -> DMatrix<f64> {
    p.n_forward().unwrap().to_dense()
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

// Problems for the process checks: 20 ≤ m, n ≤ 60, identity or diagonal
// preconditioners alternating with the seed.
fn process_problem(seed: u64, max_n: usize) -> SqdProblem {
    let mut r = rng(1000 + seed);
    let m = r.gen_range(20..=60);
    let n = r.gen_range(20..=max_n);
    let pc = if seed % 2 == 0 { Precond::Identity } else { Precond::Diagonal };
    random_problem(seed, m, n, 0.3, pc)
}

// T of size (k+1) × k: αⱼ on the diagonal, βⱼ₊₁ below, γⱼ₊₁ above.
fn t_matrix(co: &SsyCoefficients, k: usize) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(k + 1, k);
    for j in 0..k {
        t[(j, j)] = co.alphas[j];
        t[(j + 1, j)] = co.betas[j + 1];
        if j + 1 < k {
            t[(j, j + 1)] = co.gammas[j + 1];
        }
    }
    t
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let k = 10;
    let mut worst = (0.0f64, 0.0f64);
    for seed in 0..20 {
        let p = process_problem(seed, 60);
        let basis = ssy_basis(&p, k);
        ensure(!basis.terminated, || format!("seed {seed} terminated early"))?;
        let (a, mm, nn) = (dense_a(&p), dense_m(&p), dense_n(&p));
        let vk = basis.v.columns(0, k);
        let uk = basis.u.columns(0, k);
        let id = DMatrix::<f64>::identity(k, k);
        let ov = (vk.transpose() * &mm * vk - &id).amax();
        let ou = (uk.transpose() * &nn * uk - &id).amax();
        // A Uₖ = M Vₖ₊₁ Tₖ₊₁,ₖ and Aᵀ Vₖ = N Uₖ₊₁ T̃ₖ₊₁,ₖ with β and γ swapped.
        let t = t_matrix(&basis.co, k);
        let mut swapped = basis.co.clone();
        std::mem::swap(&mut swapped.betas, &mut swapped.gammas);
        let tt = t_matrix(&swapped, k);
        let anorm = a.norm();
        let ev = (&a * uk - &mm * &basis.v * &t).amax() / anorm;
        let eu = (a.transpose() * vk - &nn * &basis.u * &tt).amax() / anorm;
        ensure(ov <= 1e-8 && ou <= 1e-8, || format!("seed {seed}: orthogonality {ov:.1e}, {ou:.1e}"))?;
        ensure(ev <= 1e-10 && eu <= 1e-10, || format!("seed {seed}: three-term {ev:.1e}, {eu:.1e}"))?;
        worst.0 = worst.0.max(ov.max(ou));
        worst.1 = worst.1.max(ev.max(eu));
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!(
        "20 problems: max orthogonality defect {:.1e}, max three-term defect {:.1e}·‖A‖, {:.2?}",
        worst.0,
        worst.1,
        start.elapsed()
    ))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let k = 10;
    let mut worst = (0.0f64, 0.0f64);
    for seed in 0..10 {
        let p = process_problem(100 + seed, 40);
        let (m, n) = p.dims();
        let basis = ssy_basis(&p, k);
        let a = dense_a(&p);
        let mut k0 = DMatrix::zeros(m + n, m + n);
        k0.view_mut((0, m), (m, n)).copy_from(&a);
        k0.view_mut((m, 0), (n, m)).copy_from(&a.transpose());
        let mut bblock = DMatrix::zeros(m + n, 2);
        bblock.view_mut((0, 0), (m, 1)).copy_from(&DVector::from_column_slice(p.b()));
        bblock.view_mut((m, 1), (n, 1)).copy_from(&DVector::from_column_slice(p.c()));
        let (h, hinv) = dense_h(&p);
        let bl = block_lanczos_reference(&k0, &bblock, &OperatorHandle::from_dense(hinv), k).unwrap();
        ensure(bl.blocks() >= k, || format!("seed {seed}: reference stopped at {} blocks", bl.blocks()))?;
        let w = interleaved_w(&basis, k);
        let lambda = DMatrix::from_diagonal(&DVector::from_vec(vec![p.tau().value(), p.nu().value()]));
        // Within each block the two bases may differ by ordering and sign:
        // Qⱼ = W_blᵀ H W_ssy must be a signed permutation.
        for j in 0..k {
            let wb = bl.w.columns(2 * j, 2);
            let ws = w.columns(2 * j, 2);
            let q = wb.transpose() * &h * ws;
            let perm = q.map(|x| x.abs().round().clamp(0.0, 1.0) * x.signum());
            let dq = (&q - &perm).amax();
            let dw = (wb * &perm - ws).amax();
            ensure(dq <= 1e-10 && dw <= 1e-10, || format!("seed {seed} block {}: Q {dq:.1e}, W {dw:.1e}", j + 1))?;
            let omega = DMatrix::from_column_slice(2, 2, bl.omegas[j].as_slice());
            let theta = DMatrix::from_row_slice(
                2,
                2,
                &[p.tau().value(), basis.co.alphas[j], basis.co.alphas[j], p.nu().value()],
            );
            let dt = (perm.transpose() * omega * &perm + &lambda - theta).amax();
            ensure(dt <= 1e-10, || format!("seed {seed} block {}: Θ − (Ω + Λ) {dt:.1e}", j + 1))?;
            worst.0 = worst.0.max(dw);
            worst.1 = worst.1.max(dt);
        }
    }
    within(start.elapsed(), 5.0)?;
    Ok(format!(
        "10 problems × 10 blocks: max basis gap {:.1e}, max Θ gap {:.1e}, {:.2?}",
        worst.0,
        worst.1,
        start.elapsed()
    ))
}

// Unit lower-triangular L and diagonal D from the per-iteration scalars.
fn ldlt_dense(steps: &[LdltScalars]) -> (DMatrix<f64>, DMatrix<f64>) {
    let size = 2 * steps.len();
    let mut l = DMatrix::identity(size, size);
    let mut d = DMatrix::zeros(size, size);
    for (j, s) in steps.iter().enumerate() {
        let (o, e) = (2 * j, 2 * j + 1);
        d[(o, o)] = s.d_odd;
        d[(e, e)] = s.d_even;
        l[(e, o)] = s.delta;
        if j > 0 {
            l[(o, o - 1)] = s.sigma;
            l[(e, o - 2)] = s.eta;
            l[(e, o - 1)] = s.lambda;
        }
    }
    (l, d)
}

fn criterion_3() -> Check {
    let kmax = 10;
    let mut worst = (0.0f64, 0.0f64);
    for seed in 0..10 {
        let p = process_problem(200 + seed, 60);
        let basis = ssy_basis(&p, kmax);
        let mut solver = TriCg::new(&p, &opts()).unwrap();
        let mut ldlt = Vec::new();
        for k in 1..=kmax {
            let st = solver.step().map_err(|e| format!("seed {seed} k {k}: {e}"))?;
            ldlt.push(st.ldlt);
            let s = assemble_s(&basis.co, p.tau(), p.nu(), 2 * k, k).unwrap();
            let z = s.clone().lu().solve(&e12(basis.co.betas[0], basis.co.gammas[0], 2 * k)).unwrap();
            let oracle = interleaved_w(&basis, k) * z;
            let e = rel_err(&stack(solver.x(), solver.y()), &oracle);
            let (l, d) = ldlt_dense(&ldlt);
            let f = (&l * d * l.transpose() - &s).amax() / s.amax();
            ensure(e <= 1e-9, || format!("seed {seed} k {k}: iterate error {e:.1e}"))?;
            ensure(f <= 1e-12, || format!("seed {seed} k {k}: LDLᵀ defect {f:.1e}"))?;
            worst.0 = worst.0.max(e);
            worst.1 = worst.1.max(f);
        }
    }
    Ok(format!(
        "10 solves × 10 iterations: max iterate error {:.1e}, max LDLᵀ defect {:.1e}",
        worst.0, worst.1
    ))
}

// Q = G₁G₂⋯ from the reflections of iterations 1..=k (each symmetric) and
// R from the finished columns.
fn qr_dense(cols: &[QrColumns]) -> (DMatrix<f64>, DMatrix<f64>) {
    let k = cols.len();
    let rows = 2 * k + 2;
    let mut q = DMatrix::<f64>::identity(rows, rows);
    let mut r = DMatrix::zeros(2 * k, 2 * k);
    for (j, c) in cols.iter().enumerate() {
        let kk = j + 1;
        let pairs = [(2 * kk, 2 * kk + 2), (2 * kk - 1, 2 * kk), (2 * kk, 2 * kk + 2), (2 * kk, 2 * kk + 1)];
        for (g, (a, b)) in c.reflections.iter().zip(pairs) {
            let mut gm = DMatrix::<f64>::identity(rows, rows);
            let (a, b) = (a - 1, b - 1);
            gm[(a, a)] = g.c;
            gm[(a, b)] = g.s;
            gm[(b, a)] = g.s;
            gm[(b, b)] = -g.c;
            q *= gm;
        }
        let (o, e) = (2 * kk - 2, 2 * kk - 1);
        for (t, &v) in c.odd.iter().enumerate() {
            if let Some(row) = (o + t).checked_sub(4) {
                r[(row, o)] = v;
            }
        }
        for (t, &v) in c.even.iter().enumerate() {
            if let Some(row) = (e + t).checked_sub(4) {
                r[(row, e)] = v;
            }
        }
    }
    (q, r)
}

fn criterion_4(histories: &[Vec<f64>]) -> Check {
    let kmax = 10;
    let mut worst = (0.0f64, 0.0f64);
    let signs = [(1, -1), (-1, 1), (1, 1), (-1, -1), (1, 0)];
    for seed in 0..10 {
        let (tau, nu) = signs[seed as usize % signs.len()];
        let p = with_signs(process_problem(300 + seed, 60), tau, nu);
        let basis = ssy_basis(&p, kmax);
        let mut solver = TriMr::new(&p, &opts()).unwrap();
        let mut cols = Vec::new();
        for k in 1..=kmax {
            let st = solver.step().map_err(|e| format!("seed {seed} k {k}: {e}"))?;
            cols.push(st.columns);
            let s = assemble_s(&basis.co, p.tau(), p.nu(), 2 * k + 2, k).unwrap();
            let (_, opt) = least_squares(&s, &e12(basis.co.betas[0], basis.co.gammas[0], 2 * k + 2));
            let e = rel(st.rnorm, opt);
            let (q, r) = qr_dense(&cols);
            let f = (q.columns(0, 2 * k) * r - &s).amax() / s.amax();
            ensure(e <= 1e-9, || format!("seed {seed} ({tau},{nu}) k {k}: residual {:.3e} vs optimum {opt:.3e}", st.rnorm))?;
            ensure(f <= 1e-12, || format!("seed {seed} ({tau},{nu}) k {k}: QR defect {f:.1e}"))?;
            worst.0 = worst.0.max(e);
            worst.1 = worst.1.max(f);
        }
    }
    for (i, h) in histories.iter().enumerate() {
        if let Some(k) = h.windows(2).position(|w| w[1] > w[0]) {
            return Err(format!("TriMR history {i} increases at k = {}", k + 1));
        }
    }
    Ok(format!(
        "10 solves × 10 iterations: max optimum gap {:.1e}, max QR defect {:.1e}; {} histories nonincreasing",
        worst.0,
        worst.1,
        histories.len()
    ))
}

// The seeded solves reused by criteria 4, 5 and 10: SQD problems with all
// three kinds of preconditioner, solved step by step.
struct Traced {
    recurrence: Vec<f64>,
    explicit: Vec<f64>,
    reflections: Vec<GivensPair>,
}

fn traced_problems() -> Vec<SqdProblem> {
    let pcs = [Precond::Identity, Precond::Diagonal, Precond::Dense];
    (0..12)
        .map(|seed| {
            let mut r = rng(400 + seed);
            let (m, n) = (r.gen_range(20..=60), r.gen_range(20..=60));
            random_problem(400 + seed, m, n, 0.2, pcs[seed as usize % 3])
        })
        .collect()
}

fn trace_tricg(p: &SqdProblem) -> Traced {
    let mut s = TriCg::new(p, &opts()).unwrap();
    let r0 = p.explicit_residual(&vec![0.0; p.dims().0], &vec![0.0; p.dims().1]).unwrap();
    let mut t = Traced { recurrence: vec![r0], explicit: vec![r0], reflections: vec![] };
    let limit = opts().max_iterations_for(p.dims().0, p.dims().1);
    while s.k() < limit && !s.is_terminated() {
        let st = s.step().unwrap();
        t.recurrence.push(st.rnorm);
        t.explicit.push(p.explicit_residual(s.x(), s.y()).unwrap());
        if stopping_check(st.rnorm, (s.beta1(), s.gamma1()), &opts()) {
            break;
        }
    }
    t
}

fn trace_trimr(p: &SqdProblem) -> Traced {
    let mut s = TriMr::new(p, &opts()).unwrap();
    let r0 = p.explicit_residual(&vec![0.0; p.dims().0], &vec![0.0; p.dims().1]).unwrap();
    let mut t = Traced { recurrence: vec![r0], explicit: vec![r0], reflections: vec![] };
    let limit = opts().max_iterations_for(p.dims().0, p.dims().1);
    while s.k() < limit && !s.process().is_terminated() {
        let st = s.step().unwrap();
        t.recurrence.push(st.rnorm);
        t.explicit.push(p.explicit_residual(s.x(), s.y()).unwrap());
        t.reflections.extend(st.columns.reflections);
        if stopping_check(st.rnorm, (s.beta1(), s.gamma1()), &opts()) {
            break;
        }
    }
    t
}

fn criterion_5(traces: &[(&str, Traced)]) -> Check {
    let mut worst = 0.0f64;
    for (i, (name, t)) in traces.iter().enumerate() {
        let r0 = t.explicit[0];
        for (k, (&rec, &exp)) in t.recurrence.iter().zip(&t.explicit).enumerate() {
            if exp < 1e-10 * r0 {
                break;
            }
            let e = rel(rec, exp);
            ensure(e <= 1e-6, || format!("{name} solve {i} k {k}: recurrence {rec:.3e} vs explicit {exp:.3e}"))?;
            worst = worst.max(e);
        }
    }
    Ok(format!("{} solves: max relative gap {worst:.1e}", traces.len()))
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut iters = Vec::new();
    for seed in 0..3 {
        let p = generate_random_sqd(100, 100, 0.05, seed).map_err(|e| e.to_string())?;
        for (name, r) in [("TriCG", tricg_solve(&p, &opts())), ("TriMR", trimr_solve(&p, &opts()))] {
            let r = r.map_err(|e| format!("{name} seed {seed}: {e}"))?;
            ensure(r.converged(), || format!("{name} seed {seed}: {}", r.status))?;
            ensure(r.iterations <= 400, || format!("{name} seed {seed}: {} iterations", r.iterations))?;
            let err = stack(&r.x, &r.y).add_scalar(-1.0).norm();
            ensure(err <= 1e-6 * 200f64.sqrt(), || format!("{name} seed {seed}: error {err:.1e}"))?;
            worst = worst.max(err);
            iters.push(r.iterations);
        }
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!(
        "3 problems 100×100: iterations {iters:?}, max ‖(x,y) − 1‖ {worst:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn criterion_7() -> Check {
    let mut r = rng(7);
    let (mut wins, mut ratios) = (0, Vec::new());
    let mut lines = Vec::new();
    for seed in 0..20 {
        let (m, n) = (r.gen_range(50..=200), r.gen_range(50..=200));
        let p = generate_random_sqd(m, n, 0.05, 700 + seed).map_err(|e| e.to_string())?;
        let count = |k: SolverKind| -> std::result::Result<usize, String> {
            let rep = solve_with(k, &p, &opts()).map_err(|e| format!("{k} seed {seed}: {e}"))?;
            ensure(rep.converged(), || format!("{k} seed {seed}: {}", rep.status))?;
            Ok(rep.iterations)
        };
        let (cg, mr) = (count(SolverKind::TriCg)?, count(SolverKind::TriMr)?);
        let (lq, mi) = (count(SolverKind::Symmlq)?, count(SolverKind::Minres)?);
        if cg <= lq && mr <= mi {
            wins += 1;
        }
        ratios.push(cg as f64 / lq as f64);
        ratios.push(mr as f64 / mi as f64);
        lines.push(format!("{m}x{n}:{cg}/{lq},{mr}/{mi}"));
    }
    ratios.sort_by(f64::total_cmp);
    let median = (ratios[19] + ratios[20]) / 2.0;
    let summary = format!("{wins}/20 instances no worse, median ratio {median:.3}");
    ensure(wins >= 18 && median <= 0.8, || format!("{summary} [{}]", lines.join(" ")))?;
    Ok(summary)
}

fn well1033_path() -> Option<PathBuf> {
    let mut candidates: Vec<PathBuf> = std::env::var_os("WELL1033").map(PathBuf::from).into_iter().collect();
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    for dir in [root.clone(), root.join("../.."), root.join("../../data"), root.join("../../examples")] {
        candidates.push(dir.join("well1033.mtx"));
    }
    candidates.into_iter().find(|p| p.is_file())
}

// None means skipped.
fn criterion_8() -> Option<Check> {
    let path = well1033_path()?;
    Some((|| {
        let source = ProblemSource::MatrixMarket { path, tau: Sign::Plus, nu: Sign::Minus, nshift: 0.0 };
        let p = source.build().map_err(|e| e.to_string())?;
        let mut it = Vec::new();
        for k in SolverKind::ALL {
            let rep = solve_with(k, &p, &opts()).map_err(|e| format!("{k}: {e}"))?;
            ensure(rep.converged(), || format!("{k}: {}", rep.status))?;
            it.push(rep.iterations);
        }
        ensure(it[0] < it[2] && it[1] < it[3], || format!("iterations tricg/trimr/symmlq/minres {it:?}"))?;
        Ok(format!("iterations tricg/trimr/symmlq/minres {it:?}"))
    })())
}

fn criterion_9() -> Check {
    // A = 0: one iteration each.
    let zero = OperatorHandle::from_dense(DMatrix::zeros(4, 3));
    let p = SqdProblem::new(zero, dv(&[1.0, -2.0, 0.5, 3.0]), dv(&[2.0, 1.0, -1.0])).unwrap();
    for (name, r) in [("TriCG", tricg_solve(&p, &opts())), ("TriMR", trimr_solve(&p, &opts()))] {
        let r = r.map_err(|e| format!("A = 0 {name}: {e}"))?;
        ensure(r.converged() && r.iterations == 1, || format!("A = 0 {name}: {} after {}", r.status, r.iterations))?;
    }

    // Saddle point: [[M, A], [Aᵀ, 0]].
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let pc = if seed % 2 == 0 { Precond::Identity } else { Precond::Diagonal };
        let p = with_signs(random_problem(900 + seed, 40, 15, 0.3, pc), 1, 0);
        let r = trimr_solve(&p, &opts()).map_err(|e| format!("saddle seed {seed}: {e}"))?;
        ensure(r.converged(), || format!("saddle seed {seed}: {}", r.status))?;
        let exact = dense_solve(&p.dense_k().unwrap(), &rhs_vector(&p));
        let e = rel_err(&stack(&r.x, &r.y), &exact);
        ensure(e <= 1e-8, || format!("saddle seed {seed}: error {e:.1e}"))?;
        worst = worst.max(e);
    }

    // bᵀMb + 2bᵀAc − cᵀNc = 0 with M = N = I: the first CG step on K has
    // p₀ᵀKp₀ = 0 for p₀ = (b, c).
    let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 0.0, 1.0, 1.0, 0.0]);
    let (b, c) = (DVector::from_vec(vec![-1.0, 2.0, -1.0]), DVector::from_vec(vec![1.0, 1.0]));
    let p = SqdProblem::new(
        OperatorHandle::from_dense(a.clone()),
        dv(b.as_slice()),
        dv(c.as_slice()),
    )
    .unwrap();
    let k = p.dense_k().unwrap();
    let r0 = rhs_vector(&p);
    let denom = r0.dot(&(&k * &r0));
    ensure(denom == 0.0, || format!("constructed CG denominator is {denom:e}"))?;
    let cg_step = r0.dot(&r0) / denom;
    ensure(!cg_step.is_finite(), || "naive CG step is finite".into())?;
    let r = tricg_solve(&p, &opts()).map_err(|e| format!("TriCG on CG-breakdown system: {e}"))?;
    ensure(r.converged(), || format!("TriCG on CG-breakdown system: {}", r.status))?;
    let exact = dense_solve(&k, &r0);
    let e = rel_err(&stack(&r.x, &r.y), &exact);
    ensure(e <= 1e-10, || format!("TriCG on CG-breakdown system: error {e:.1e}"))?;
    Ok(format!(
        "A = 0 in one iteration; 5 saddle solves max error {worst:.1e}; CG step {cg_step}, TriCG error {e:.1e}"
    ))
}

fn criterion_10(traces: &[(&str, Traced)]) -> Check {
    let mut pairs: Vec<GivensPair> = traces.iter().flat_map(|(_, t)| t.reflections.iter().copied()).collect();
    let mut r = rng(10);
    for _ in 0..10_000 {
        let scale = 10f64.powi(r.gen_range(-150..150));
        let (a, b) = (r.gen_range(-1.0..1.0) * scale, r.gen_range(-1.0..1.0) * scale);
        pairs.push(sym_givens(a, b).0);
    }
    for (a, b) in [(0.0, 0.0), (0.0, -2.0), (-3.0, 0.0), (1e-300, 1e300), (f64::MAX, f64::MAX)] {
        pairs.push(sym_givens(a, b).0);
    }
    let worst = pairs.iter().map(|g| g.orthogonality_defect()).fold(0.0, f64::max);
    ensure(worst <= 1e-14, || format!("c² + s² − 1 reached {worst:.1e}"))?;

    let plain = random_problem(1, 12, 9, 0.5, Precond::Identity);
    let pre = random_problem(1, 12, 9, 0.5, Precond::Diagonal);
    let report = |s: StorageReport| {
        (s.m_vectors, s.n_vectors, s.m_preconditioner_vectors, s.n_preconditioner_vectors)
    };
    let cg = report(TriCg::new(&plain, &opts()).unwrap().storage());
    let mr = report(TriMr::new(&plain, &opts()).unwrap().storage());
    let cg_pre = report(TriCg::new(&pre, &opts()).unwrap().storage());
    let mr_pre = report(TriMr::new(&pre, &opts()).unwrap().storage());
    ensure(cg == (5, 5, 0, 0) && mr == (7, 7, 0, 0), || format!("TriCG {cg:?}, TriMR {mr:?}"))?;
    ensure(cg_pre == (5, 5, 2, 2) && mr_pre == (7, 7, 2, 2), || {
        format!("preconditioned TriCG {cg_pre:?}, TriMR {mr_pre:?}")
    })?;
    Ok(format!(
        "{} reflections, max defect {worst:.1e}; vectors TriCG 5+5, TriMR 7+7, +2+2 with M, N ≠ I",
        pairs.len()
    ))
}

fn run(id: usize, title: &str, f: impl FnOnce() -> Option<Check>) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Some(Err(format!("panicked: {msg}")))
    });
    match outcome {
        Some(Ok(detail)) => {
            println!("PASS criterion {id:>2} {title}: {detail}");
            true
        }
        Some(Err(detail)) => {
            println!("FAIL criterion {id:>2} {title}: {detail}");
            false
        }
        None => {
            println!("SKIP criterion {id:>2} {title}: well1033.mtx not found (set WELL1033 to its path)");
            true
        }
    }
}

fn main() {
    std::panic::set_hook(Box::new(|_| {}));
    let problems = traced_problems();
    let mut traces = Vec::new();
    for p in &problems {
        traces.push(("TriCG", trace_tricg(p)));
        traces.push(("TriMR", trace_trimr(p)));
    }
    let mut trimr_histories: Vec<Vec<f64>> =
        traces.iter().filter(|(n, _)| *n == "TriMR").map(|(_, t)| t.recurrence.clone()).collect();
    for seed in 0..5 {
        let p = with_signs(random_problem(900 + seed, 40, 15, 0.3, Precond::Identity), 1, 0);
        trimr_histories.push(trimr_solve(&p, &opts()).unwrap().residual_history);
        let p = generate_random_sqd(100, 100, 0.05, seed).unwrap();
        trimr_histories.push(trimr_solve(&p, &opts()).unwrap().residual_history);
    }

    let results = [
        run(1, "process orthogonality", || Some(criterion_1())),
        run(2, "block-Lanczos equivalence", || Some(criterion_2())),
        run(3, "TriCG subproblem fidelity", || Some(criterion_3())),
        run(4, "TriMR optimality and monotonicity", || Some(criterion_4(&trimr_histories))),
        run(5, "residual recurrence fidelity", || Some(criterion_5(&traces))),
        run(6, "exact-solution recovery", || Some(criterion_6())),
        run(7, "comparative iteration counts", || Some(criterion_7())),
        run(8, "well1033 comparison", criterion_8),
        run(9, "degenerate and saddle-point cases", || Some(criterion_9())),
        run(10, "Givens and storage contracts", || Some(criterion_10(&traces))),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria passed or skipped", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
