mod common;

use common::{Fixture, Mat};
use graud::linalg::singular_values;
use graud::solver::{gradients, hessian_quadratic_form, loss};
use graud::{
    check_assumptions, chernoff_tail_bounds, delta1, projection_matrix, recovery_bound_for, solve, Graph,
    ProblemInstance, SolverConfig, SymmetricMatrix,
};
use nalgebra::{DMatrix, DVector};

fn dm(a: &Mat) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), a[0].len(), |i, j| a[i][j])
}

fn instance(r: &common::RandomInstance, y: &[f64], l1: f64, l2: f64) -> ProblemInstance {
    let g = Graph::new(r.m, r.edges.iter().copied()).unwrap();
    let basis = projection_matrix(&dm(&r.x)).unwrap();
    ProblemInstance::new(DVector::from_column_slice(y), g.laplacian(), basis.projector().clone(), l1, l2).unwrap()
}

#[test]
fn laplacian_matches_edge_list_oracle() {
    let mut rng = Fixture::new(1);
    for _ in 0..20 {
        let m = 2 + rng.below(9);
        let r = common::random_instance(&mut rng, m, 1);
        let g = Graph::new(r.m, r.edges.iter().copied()).unwrap();
        assert_eq!(g.laplacian().as_matrix(), &dm(&r.l));
    }
}

#[test]
fn path_spectrum_has_closed_form() {
    for m in 2..12 {
        let ev = Graph::path(m).unwrap().laplacian().eigenvalues();
        for (k, e) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / m as f64).cos();
            assert!((e - exact).abs() < 1e-12, "m={m} k={k}: {e} vs {exact}");
        }
    }
}

#[test]
fn grid_spectrum_matches_jacobi() {
    let g = Graph::grid(2, 5).unwrap();
    let oracle = common::jacobi_eigenvalues(&common::laplacian(10, g.edges()));
    let ev = g.laplacian().eigenvalues();
    assert!(common::max_abs_diff(&ev, &oracle) < 1e-10);
    // Eigenvalues of P2 x P5 are sums of the factors' path eigenvalues.
    assert!((ev[1] - 0.381_966_011_250_105_1).abs() < 1e-12);
}

#[test]
fn symmetric_eigenvalues_match_jacobi() {
    let mut rng = Fixture::new(2);
    for _ in 0..30 {
        let n = 1 + rng.below(9);
        let mut a = common::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = rng.uniform(-2.0, 2.0);
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let ev = SymmetricMatrix::new(dm(&a)).unwrap().eigenvalues();
        assert!(common::max_abs_diff(&ev, &common::jacobi_eigenvalues(&a)) < 1e-10);
    }
}

#[test]
fn projector_matches_normal_equations() {
    let mut rng = Fixture::new(3);
    for _ in 0..30 {
        let m = 3 + rng.below(8);
        let k = 1 + rng.below(m - 1);
        let x: Mat = (0..m).map(|_| (0..k).map(|_| rng.uniform(-1.0, 1.0)).collect()).collect();
        let h = projection_matrix(&dm(&x)).unwrap();
        let diff = h.projector().as_matrix() - dm(&common::projector(&x));
        assert!(diff.amax() < 1e-9, "{}", diff.amax());
    }
}

#[test]
fn delta1_matches_gram_eigenvalue() {
    let mut rng = Fixture::new(4);
    for _ in 0..30 {
        let m = 3 + rng.below(8);
        let k = 1 + rng.below(m - 2);
        let r = common::random_instance(&mut rng, m, k);
        let inst = instance(&r, &vec![0.0; m], 1.0, 1.0);
        let got = delta1(inst.laplacian(), inst.projector()).unwrap();
        assert!((got - common::delta1(&r.l, &r.h)).abs() < 1e-8);
    }
}

#[test]
fn delta1_of_p3_with_linear_feature() {
    let g = Graph::path(3).unwrap();
    let basis = projection_matrix(&DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0])).unwrap();
    let report = check_assumptions(&g, &basis).unwrap();
    assert!((report.delta1 - 0.272_359_872_645_455_3).abs() < 1e-12);
    let block = singular_values(&DMatrix::from_fn(3, 6, |i, j| {
        if j < 3 { g.laplacian().get(i, j) } else { basis.projector().get(i, j - 3) }
    }));
    assert!((block[0] - report.delta1).abs() < 1e-14);
}

#[test]
fn unconstrained_solve_reaches_stationary_point() {
    let mut rng = Fixture::new(5);
    let cfg = SolverConfig {
        outer_iters: 200_000,
        stop_threshold: 0.0,
        ..SolverConfig::unconstrained()
    };
    for _ in 0..10 {
        let m = 3 + rng.below(6);
        let k = 1 + rng.below(m - 2);
        let r = common::random_instance(&mut rng, m, k);
        let y: Vec<f64> = (0..m).map(|_| rng.uniform(0.0, 5.0)).collect();
        let (l1, l2) = (rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0));
        let sol = solve(&instance(&r, &y, l1, l2), &cfg, None).unwrap();
        let (u, v) = common::stationary_point(&y, &r.l, &r.h, l1, l2);
        assert!(common::max_abs_diff(&sol.u, &u) < 1e-8);
        assert!(common::max_abs_diff(&sol.v, &v) < 1e-8);
    }
}

#[test]
fn loss_matches_written_out_formula() {
    let mut rng = Fixture::new(6);
    for _ in 0..20 {
        let m = 3 + rng.below(6);
        let r = common::random_instance(&mut rng, m, 1);
        let draw = |rng: &mut Fixture| (0..m).map(|_| rng.uniform(-2.0, 2.0)).collect::<Vec<_>>();
        let (y, u, v) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        let inst = instance(&r, &y, 0.3, 1.7);
        let got = loss(&DVector::from_vec(u.clone()), &DVector::from_vec(v.clone()), &inst).unwrap();
        let want = common::loss(&y, &u, &v, &r.l, &r.h, 0.3, 1.7);
        assert!((got - want).abs() < 1e-10 * want.max(1.0));
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = Fixture::new(7);
    let m = 6;
    let r = common::random_instance(&mut rng, m, 2);
    let y: Vec<f64> = (0..m).map(|_| rng.uniform(0.0, 4.0)).collect();
    let inst = instance(&r, &y, 0.5, 2.0);
    let u = DVector::from_fn(m, |_, _| rng.uniform(-1.0, 4.0));
    let v = DVector::from_fn(m, |_, _| rng.uniform(-2.0, 0.0));
    let (gu, gv) = gradients(&u, &v, &inst).unwrap();
    let h = 1e-6;
    for i in 0..m {
        let mut e = DVector::zeros(m);
        e[i] = h;
        let fd_u = (loss(&(&u + &e), &v, &inst).unwrap() - loss(&(&u - &e), &v, &inst).unwrap()) / (2.0 * h);
        let fd_v = (loss(&u, &(&v + &e), &inst).unwrap() - loss(&u, &(&v - &e), &inst).unwrap()) / (2.0 * h);
        assert!((fd_u - gu[i]).abs() < 1e-6 * gu[i].abs().max(1.0));
        assert!((fd_v - gv[i]).abs() < 1e-6 * gv[i].abs().max(1.0));
    }
}

#[test]
fn hessian_form_is_half_the_second_difference() {
    let mut rng = Fixture::new(8);
    let m = 5;
    let r = common::random_instance(&mut rng, m, 2);
    let y: Vec<f64> = (0..m).map(|_| rng.uniform(0.0, 4.0)).collect();
    let inst = instance(&r, &y, 0.7, 1.3);
    let u = DVector::from_fn(m, |_, _| rng.uniform(-1.0, 4.0));
    let v = DVector::from_fn(m, |_, _| rng.uniform(-2.0, 0.0));
    let du = DVector::from_fn(m, |_, _| rng.uniform(-1.0, 1.0));
    let dv = DVector::from_fn(m, |_, _| rng.uniform(-1.0, 1.0));
    // The loss is quadratic, so the second difference is exact up to roundoff.
    let t = 1e-2;
    let f = |s: f64| loss(&(&u + &du * s), &(&v + &dv * s), &inst).unwrap();
    let second = (f(t) - 2.0 * f(0.0) + f(-t)) / (t * t);
    let form = hessian_quadratic_form(&du, &dv, &inst).unwrap();
    assert!((second - 2.0 * form).abs() < 1e-6 * form.max(1.0), "{second} vs {form}");
}

#[test]
fn noiseless_bound_constants_match_formula() {
    let mut rng = Fixture::new(9);
    let m = 7;
    let r = common::random_instance(&mut rng, m, 2);
    let u0: Vec<f64> = (0..m).map(|_| rng.uniform(1.0, 5.0)).collect();
    let v0: Vec<f64> = (0..m).map(|_| rng.uniform(-1.0, -0.1)).collect();
    let noise: Vec<f64> = (0..m).map(|_| rng.uniform(-0.1, 0.1)).collect();
    let y: Vec<f64> = (0..m).map(|i| u0[i] + v0[i] + noise[i]).collect();
    let (l1, l2) = (0.4, 2.5);
    let inst = instance(&r, &y, l1, l2);
    let b = recovery_bound_for(&DVector::from_vec(u0.clone()), &DVector::from_vec(v0.clone()), &inst).unwrap();

    let ev_l = common::jacobi_eigenvalues(&r.l);
    let ev_h = common::jacobi_eigenvalues(&r.h);
    let lmin_l = ev_l.into_iter().find(|&e| e > 1e-8).unwrap();
    let lmin_h = ev_h.into_iter().find(|&e| e > 1e-8).unwrap();
    let d1 = common::delta1(&r.l, &r.h);
    let quad = |a: &Mat, x: &[f64]| x.iter().zip(common::matvec(a, x)).map(|(p, q)| p * q).sum::<f64>();
    let eps_y: f64 = noise.iter().map(|e| e * e).sum();
    let c0 = 2.0 + 1.0 / (l1 * lmin_l).sqrt() + 1.0 / (l2 * lmin_h).sqrt();
    let bound_u = 2.0 / d1 * c0 * c0 * eps_y + quad(&r.h, &u0) / lmin_h;
    let bound_v = 2.0 / d1 * c0 * c0 * eps_y + quad(&r.l, &v0) / lmin_l;
    assert!((b.c0 - c0).abs() < 1e-9 * c0);
    assert!((b.bound_u - bound_u).abs() < 1e-8 * bound_u);
    assert!((b.bound_v - bound_v).abs() < 1e-8 * bound_v);
}

#[test]
fn chernoff_bounds_match_closed_form() {
    let b = chernoff_tail_bounds(1000, 0.5, 0.1).unwrap();
    assert_eq!(b.mu, 500.0);
    assert!((b.upper - (-0.01f64 * 500.0 / 3.0).exp()).abs() < 1e-15);
    assert!((b.lower - (-0.01f64 * 500.0 / 2.0).exp()).abs() < 1e-15);
}

#[test]
fn spearman_oracle_sanity() {
    assert!((common::spearman(&[1., 2., 3., 4.], &[10., 20., 30., 40.]) - 1.0).abs() < 1e-15);
    assert!((common::spearman(&[1., 2., 3., 4.], &[4., 3., 2., 1.]) + 1.0).abs() < 1e-15);
    assert!((common::spearman(&[1., 2., 3.], &[1., 1., 2.]) - 0.866_025_403_784_438_6).abs() < 1e-12);
}
