mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use sqd_krylov::*;

fn arb_problem() -> impl Strategy<Value = SqdProblem> {
    let signs = prop_oneof![Just((1i8, -1i8)), Just((-1, 1)), Just((1, 1)), Just((-1, -1))];
    (2usize..20, 2usize..20, any::<u64>(), 0.2f64..0.9, 0u8..3, signs).prop_map(|(m, n, seed, d, pc, (tau, nu))| {
        let pc = [Precond::Identity, Precond::Diagonal, Precond::Dense][pc as usize];
        with_signs(random_problem(seed, m, n, d, pc), tau, nu)
    })
}

// min ‖r₀ − K Q z‖_{H⁻¹} over the first `j` preconditioned Krylov vectors,
// with the basis orthonormalized densely and twice.
fn krylov_optimum(k: &DMatrix<f64>, h: &DMatrix<f64>, hinv: &DMatrix<f64>, r0: &DVector<f64>, j: usize) -> f64 {
    let l = hinv.clone().cholesky().unwrap().l();
    let mut q: Vec<DVector<f64>> = vec![hinv * r0];
    for i in 1..j {
        let mut w = hinv * (k * &q[i - 1]);
        for _ in 0..2 {
            for v in &q {
                let c = (v.transpose() * h * &w)[(0, 0)];
                w -= v * c;
            }
        }
        let nrm = (w.transpose() * h * &w)[(0, 0)].sqrt();
        q.push(w / nrm);
    }
    let qm = DMatrix::from_columns(&q);
    least_squares(&(l.transpose() * k * qm), &(l.transpose() * r0)).1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn both_baselines_match_dense_solves(p in arb_problem()) {
        let view = FullSystemView::new(&p).unwrap();
        let exact = dense_solve(&p.dense_k().unwrap(), &rhs_vector(&p));
        for r in [minres_solve(&view, &SolverOptions::default()).unwrap(), symmlq_solve(&view, &SolverOptions::default()).unwrap()] {
            prop_assert!(r.converged(), "{:?}", r.status);
            prop_assert!(rel_err(&stack(&r.x, &r.y), &exact) < 1e-7);
            prop_assert_eq!(r.residual_history.len(), r.iterations + 1);
        }
    }

    #[test]
    fn minres_is_optimal_and_monotone(p in arb_problem()) {
        let view = FullSystemView::new(&p).unwrap();
        let r = minres_solve(&view, &SolverOptions::default()).unwrap();
        prop_assert!(r.residual_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        let k = p.dense_k().unwrap();
        let (h, hinv) = dense_h(&p);
        let r0 = rhs_vector(&p);
        let scale = r.residual_history[0];
        for j in 1..r.iterations.min(6) {
            let best = krylov_optimum(&k, &h, &hinv, &r0, j);
            prop_assert!((r.residual_history[j] - best).abs() <= 1e-8 * scale, "j {j}: {} vs {best}", r.residual_history[j]);
        }
    }

    #[test]
    fn full_system_view_applies_k(p in arb_problem(), seed in any::<u64>()) {
        let view = FullSystemView::new(&p).unwrap();
        let z = random_vec(&mut rng(seed), view.dim());
        let mut out = vec![0.0; view.dim()];
        view.apply_k(&z, &mut out);
        let want = p.dense_k().unwrap() * DVector::from_column_slice(&z);
        prop_assert!((DVector::from_vec(out) - want).amax() < 1e-12);
        let mut hz = vec![0.0; view.dim()];
        view.apply_h_inv(&z, &mut hz);
        let want = dense_h(&p).1 * DVector::from_column_slice(&z);
        prop_assert!((DVector::from_vec(hz) - want).amax() < 1e-10);
    }
}

#[test]
fn saddle_point_systems_are_accepted() {
    let p = with_signs(random_problem(3, 20, 8, 1.0, Precond::Diagonal), 1, 0);
    let view = FullSystemView::new(&p).unwrap();
    let exact = dense_solve(&p.dense_k().unwrap(), &rhs_vector(&p));
    let r = minres_solve(&view, &SolverOptions::default()).unwrap();
    assert!(r.converged());
    assert!(rel_err(&stack(&r.x, &r.y), &exact) < 1e-7);
}

#[test]
fn view_requires_forward_preconditioners() {
    let p = random_problem(1, 4, 3, 1.0, Precond::Dense);
    let q = SqdProblem::new(p.a().clone(), p.b().clone(), p.c().clone())
        .unwrap()
        .with_inverse_preconditioners(p.m_inv().clone(), p.n_inv().clone())
        .unwrap();
    assert!(matches!(FullSystemView::new(&q), Err(Error::MissingForwardOperator(_))));
}

#[test]
fn symmlq_takes_the_cg_point_on_definite_systems() {
    // For (τ, ν) = (1, 1) and M = N = I the system is SPD; the transferred
    // residual must agree with an explicit computation at the end.
    let p = with_signs(random_problem(12, 15, 15, 0.4, Precond::Identity), 1, 1);
    let view = FullSystemView::new(&p).unwrap();
    let r = symmlq_solve(&view, &SolverOptions::default()).unwrap();
    assert!(r.converged());
    let explicit = dense_residual(&p, &r.x, &r.y);
    assert!((explicit - r.final_residual()).abs() <= 1e-9 * r.residual_history[0]);
}
