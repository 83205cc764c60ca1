use proptest::prelude::*;

use crate::classcheck::{verify_membership, ClassKind, DEFAULT_TOL};
use crate::gd::{gd_run, GdConfig, StepRule};
use crate::linesearch::golden_section_min;
use crate::lqr::{self, LqrProblem};
use crate::objective::{finite_difference_gradient, make_quadratic_objective};
use crate::oqa::{averaged_minimum, optimal_average, Quadratic};
use crate::sampling::halton;
use crate::wes::{agd_run_recorded, solve_alpha, AgdConfig, WesVariant};
use crate::{ClassParams, Matrix, Point};

fn point(dim: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-2.0..2.0f64, dim).prop_map(Point::from_vec)
}

fn diag_quad(d: &[f64], centre: &[f64]) -> crate::Oracle {
    let h = Matrix::from_diagonal(&Point::from_column_slice(d));
    make_quadratic_objective(h, Point::from_column_slice(centre)).unwrap()
}

prop_compose! {
    fn quadratic_pair()(kappa in 0.1..5.0f64, ma in -3.0..3.0f64, mb in -3.0..3.0f64,
                        ca in point(3), cb in point(3)) -> (Quadratic, Quadratic) {
        (Quadratic { m: ma, c: ca, kappa }, Quadratic { m: mb, c: cb, kappa })
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimal_average_dominates_every_mixture((a, b) in quadratic_pair(), lambda in 0.0..=1.0f64) {
        let (avg, lam) = optimal_average(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&lam));
        prop_assert!(avg.m >= a.m.max(b.m) - 1e-12);
        prop_assert!(avg.m >= averaged_minimum(&a, &b, lambda) - 1e-12);
        prop_assert!((avg.m - averaged_minimum(&a, &b, lam)).abs() <= 1e-10 * (1.0 + avg.m.abs()));
    }

    #[test]
    fn alpha_solves_its_quadratic(l in 0.1..100.0f64, gamma in 0.05..=1.0f64, mu_frac in 0.0..0.99f64,
                                  gk in 1e-3..100.0f64, scale in prop::sample::select(vec![1.0, 4.0])) {
        let mu = mu_frac * scale * l / (gamma * gamma);
        let a = solve_alpha(l, gamma, mu, gk, scale).unwrap();
        prop_assert!(a > 0.0 && a < 1.0);
        let lhs = scale * l * a * a / (gamma * gamma);
        let rhs = (1.0 - a) * gk + a * mu;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn golden_section_finds_parabola_vertex(t0 in -5.0..5.0f64, width in 0.5..10.0f64) {
        let (a, b) = (t0 - width * 0.3, t0 + width * 0.7);
        let m = golden_section_min(|t| (t - t0).powi(2), a, b, 1e-10, 200).unwrap();
        prop_assert!((m.t - t0).abs() <= 1e-9);
        prop_assert!(m.evals <= 202);
    }

    #[test]
    fn finite_differences_match_quadratic_gradient(d in prop::collection::vec(0.1..10.0f64, 3),
                                                   c in prop::collection::vec(-1.0..1.0f64, 3),
                                                   x in point(3)) {
        let oracle = diag_quad(&d, &c);
        let g = oracle.grad(&x).unwrap();
        let fd = finite_difference_gradient(&oracle, &x, 1e-6).unwrap();
        prop_assert!((&g - &fd).norm() <= 1e-6 * (1.0 + g.norm()));
    }

    #[test]
    fn oracle_counts_each_call(n in 0usize..20, x in point(2)) {
        let oracle = diag_quad(&[1.0, 2.0], &[0.0, 0.0]);
        oracle.reset_counters();
        for _ in 0..n {
            oracle.eval(&x).unwrap();
            oracle.grad(&x).unwrap();
        }
        prop_assert_eq!(oracle.eval_count(), n as u64);
        prop_assert_eq!(oracle.grad_count(), n as u64);
    }

    #[test]
    fn lyapunov_solution_has_small_residual(entries in prop::collection::vec(-1.0..1.0f64, 9),
                                            rho in 0.0..0.95f64) {
        let mut m = Matrix::from_row_slice(3, 3, &entries);
        let r = lqr::spectral_radius(&m);
        if r > 0.0 {
            m *= rho / r;
        }
        let w = Matrix::identity(3, 3) + &m * m.transpose();
        let x = lqr::solve_discrete_lyapunov(&m, &w).unwrap();
        prop_assert!(lqr::lyapunov_residual(&m, &w, &x) <= 1e-10 * (1.0 + w.norm()));
        prop_assert!(x.symmetric_eigenvalues().min() > 0.0);
    }

    #[test]
    fn class_params_round_trip_through_json(l in 0.1..100.0f64, gamma in 0.01..=1.0f64, mu_frac in 0.0..=1.0f64,
                                           tau in prop::option::of(0.0..10.0f64)) {
        let mut p = ClassParams::new(l, gamma, mu_frac * l).unwrap();
        if let Some(t) = tau {
            p = p.with_tau(t);
        }
        let back: ClassParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn halton_points_stay_in_box(dim in 1usize..6, lo in -5.0..0.0f64, span in 0.1..5.0f64, n in 1usize..200) {
        let pts = halton(dim, lo, lo + span, n);
        prop_assert_eq!(pts.len(), n);
        prop_assert!(pts.iter().all(|p| p.len() == dim && p.iter().all(|&v| v >= lo && v <= lo + span)));
    }

    #[test]
    fn membership_merge_matches_single_pass(split in 1usize..99, mu in 0.5..3.0f64) {
        let oracle = diag_quad(&[1.0, 2.0], &[0.0, 0.0]);
        let xs = Point::zeros(2);
        let p = ClassParams::new(4.0, 1.0, mu).unwrap();
        let pts = halton(2, -1.0, 1.0, 100);
        let whole = verify_membership(&oracle, &xs, ClassKind::QgDist, &p, &pts, DEFAULT_TOL).unwrap();
        let a = verify_membership(&oracle, &xs, ClassKind::QgDist, &p, &pts[..split], DEFAULT_TOL).unwrap();
        let b = verify_membership(&oracle, &xs, ClassKind::QgDist, &p, &pts[split..], DEFAULT_TOL).unwrap();
        let merged = a.merge(b).unwrap();
        prop_assert_eq!(merged.n_points, whole.n_points);
        prop_assert_eq!(merged.violations.len(), whole.violations.len());
        prop_assert_eq!(merged.worst_slack, whole.worst_slack);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lqr_gradient_matches_finite_differences(seed in 0u64..1000, n in 1usize..4, m in 1usize..3) {
        let p = LqrProblem::random_stable(n, m, seed).unwrap();
        let oracle = lqr::lqr_oracle(&p, false).unwrap();
        let x = lqr::flatten_gain(&Matrix::zeros(m, n));
        let g = oracle.grad(&x).unwrap();
        let fd = finite_difference_gradient(&oracle, &x, 1e-6).unwrap();
        prop_assert!((&g - &fd).norm() <= 1e-5 * g.norm().max(1e-6));
    }

    #[test]
    fn gd_distance_contracts_on_diagonal_quadratics(d in prop::collection::vec(0.1..20.0f64, 3), x0 in point(3)) {
        let oracle = diag_quad(&d, &[0.0; 3]);
        let l = d.iter().cloned().fold(0.0, f64::max);
        let mu = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let p = ClassParams::new(l, 1.0, mu).unwrap();
        let traj = gd_run(&oracle, &p, &x0, &GdConfig::new(StepRule::GammaOverL, 100)).unwrap();
        let r0 = x0.norm_squared();
        for (k, rec) in traj.records.iter().enumerate() {
            let dist = Point::from_column_slice(&rec.x).norm_squared();
            prop_assert!(dist <= (1.0 - mu / l).powi(k as i32) * r0 * (1.0 + 1e-9) + 1e-300);
        }
    }

    #[test]
    fn agd_certificate_holds_on_random_quadratics(d in prop::collection::vec(0.1..20.0f64, 3), x0 in point(3)) {
        let oracle = diag_quad(&d, &[0.0; 3]);
        let l = d.iter().cloned().fold(0.0, f64::max);
        let mu = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let p = ClassParams::new(l, 1.0, mu).unwrap();
        let run = agd_run_recorded(&oracle, &p, &x0, &AgdConfig::new(WesVariant::plain(), 100)).unwrap();
        for s in &run.states {
            prop_assert!(s.f_x <= s.phi_star + 1e-9 * (1.0 + s.phi_star.abs()));
        }
    }
}
