use einstein_forge::curvature::einstein_residual;
use einstein_forge::odes::{
    beltrami_profile, beltrami_t0, extremal_profile, quadrature_x_of_u, solve_brinkmann, solve_extremal, solve_ft,
    solve_iterated_warp, BrinkmannProblem, ExtremalParams, FtProblem, IteratedWarpProblem,
};
use einstein_forge::DomainBox;
use proptest::prelude::*;

fn ejiri() -> IteratedWarpProblem {
    // u = √(2 + cos x) at x = 0
    IteratedWarpProblem::new(4, 1.0, 0.5, 0.0, 3f64.sqrt(), 0.0).unwrap()
}

fn oscillator() -> BrinkmannProblem {
    BrinkmannProblem {
        eps: 1.0,
        k: 1.0,
        phi0: 1.0,
        dphi0: 0.5,
        ddphi0: None,
    }
}

#[test]
fn first_integrals_are_conserved_at_fine_steps() {
    let w = solve_iterated_warp(&ejiri(), [0.0, 10.0], 1e-3).unwrap();
    assert!(w.truncated_at.is_none());
    assert!(w.c_drift < 1e-8 && w.e_drift < 1e-8, "{} {}", w.c_drift, w.e_drift);
    assert!((w.c + 0.75).abs() < 1e-12);
    let b = solve_brinkmann(&oscillator(), [0.0, 10.0], 1e-3).unwrap();
    assert!(b.drift < 1e-8, "{}", b.drift);
}

#[test]
fn drift_shrinks_like_fourth_power_of_step() {
    let steps = [0.2, 0.1, 0.05];
    let warp: Vec<f64> = steps
        .iter()
        .map(|&h| solve_iterated_warp(&ejiri(), [0.0, 10.0], h).unwrap().c_drift)
        .collect();
    let osc: Vec<f64> = steps
        .iter()
        .map(|&h| solve_brinkmann(&oscillator(), [0.0, 10.0], h).unwrap().drift)
        .collect();
    for d in [warp, osc] {
        for w in d.windows(2) {
            assert!(w[0] / w[1] >= 8.0, "ratio {} from {d:?}", w[0] / w[1]);
        }
    }
}

#[test]
fn exported_warp_metrics_are_einstein() {
    let e = 1f64.exp();
    let cases = [
        // u = x^{2/3}
        (
            IteratedWarpProblem::new(3, 0.0, 0.0, 1.0, 1.0, 2.0 / 3.0).unwrap(),
            [1.0, 3.0],
        ),
        // u² = eˣ + 1
        (
            IteratedWarpProblem::new(4, -0.5, -0.5, 1.0, (e + 1.0).sqrt(), e / (2.0 * (e + 1.0).sqrt())).unwrap(),
            [1.0, 2.5],
        ),
        // u = cosh(x)^{1/2}
        (
            IteratedWarpProblem::new(
                4,
                0.0,
                -0.5,
                0.2,
                0.2f64.cosh().sqrt(),
                0.5 * 0.2f64.sinh() / 0.2f64.cosh().sqrt(),
            )
            .unwrap(),
            [0.2, 2.0],
        ),
    ];
    for (p, span) in cases {
        let sol = solve_iterated_warp(&p, span, 1e-3).unwrap();
        let spec = sol.export_metric(1.0);
        let names = spec.coordinates();
        let mut bounds = vec![[0.3, 1.3]; names.len()];
        bounds[1] = [span[0] + 0.05, span[1] - 0.05];
        let grid = DomainBox::new(names, bounds).unwrap().halton(64);
        let rep = einstein_residual(&spec, &grid, 1e-6).unwrap();
        assert!(rep.pass, "n = {}: {rep:?}", p.n);
        assert!((rep.lambda_hat - p.lambda()).abs() < 1e-6);
    }
}

#[test]
fn quadrature_agrees_with_integration() {
    // from the minimum u = 1 (x = π) the Ejiri profile reaches u = √2.5 at x = π − acos(0.5)
    let q = quadrature_x_of_u(4, 0.25, 1.0, -0.75, 1.0, 2.5f64.sqrt()).unwrap();
    assert!((q.x - (std::f64::consts::PI - 0.5f64.acos())).abs() < 1e-9, "{q:?}");
    let full = quadrature_x_of_u(4, 0.25, 1.0, -0.75, 1.0, 3f64.sqrt()).unwrap();
    assert!((full.x - std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn extremal_orbit_stays_between_turning_points() {
    let p = ExtremalParams::from_turning_point(2.0, -4.0 / 3.0).unwrap();
    let s = solve_extremal(&p, [0.0, 20.0], 1e-3).unwrap();
    let lo = 3f64.sqrt() - 1.0;
    assert!(s.k_min >= lo - 1e-8 && s.k_max <= 2.0 + 1e-8);
    assert!(s.k_min - lo < 1e-6, "orbit reaches the lower turning point");
    assert!(s.c_drift < 1e-9 && s.d_drift < 1e-9);
    let profile = extremal_profile(2.0, -4.0 / 3.0, 8.0, 1e-3).unwrap();
    assert!((profile.axis_points[1].k - lo).abs() < 1e-8);
}

#[test]
fn beltrami_profile_constants() {
    let p = beltrami_profile(8.0, 100).unwrap();
    assert!((p.t0 - 72f64.powf(0.25)).abs() < 1e-15);
    assert_eq!(p.t0, beltrami_t0());
    assert!((p.k_at_t0 + 2f64.sqrt()).abs() < 1e-10);
    let csv = p.table().to_csv_string().unwrap();
    assert!(csv.starts_with("t,r,h,K\n"));
    assert_eq!(csv.lines().count(), 101);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn oscillator_integral_is_conserved(
        eps in prop::sample::select(vec![1.0, -1.0]),
        k in -2.0f64..2.0,
        phi0 in -2.0f64..2.0,
        dphi0 in -2.0f64..2.0,
    ) {
        let p = BrinkmannProblem { eps, k, phi0, dphi0, ddphi0: None };
        let s = solve_brinkmann(&p, [0.0, 3.0], 1e-3).unwrap();
        let scale = 1.0 + p.integral(&p.initial()).abs();
        prop_assert!(s.drift < 1e-9 * scale * (1.0 + (3.0 * k.abs().sqrt()).exp()));
    }

    #[test]
    fn linear_equation_matches_closed_form(
        eps in prop::sample::select(vec![1.0, -1.0]),
        k_star in -2.0f64..2.0,
        f0 in 0.5f64..2.0,
        df0 in -1.0f64..1.0,
    ) {
        let p = FtProblem::from_initial(eps, k_star, f0, df0);
        let s = solve_ft(&p, [0.0, 2.0], 1e-3).unwrap();
        prop_assert!(s.closed_form_error < 1e-9, "{}", s.closed_form_error);
        prop_assert!(s.drift < 1e-9 * (1.0 + p.k_bar.abs()) * 100.0);
    }

    #[test]
    fn warp_third_order_equation_holds(k in -1.0f64..1.0, d in -1.0f64..1.0, du0 in -0.5f64..0.5) {
        let p = IteratedWarpProblem::new(4, k, d, 0.0, 1.0, du0).unwrap();
        let s = solve_iterated_warp(&p, [0.0, 1.0], 1e-3).unwrap();
        // the equation is singular where u vanishes
        prop_assume!(s.states.iter().all(|y| y[0] > 0.2));
        for y in &s.states {
            let (u, du) = (y[0], y[1]);
            let (ddu, dddu) = (p.second(u, du), p.third(u, du));
            let terms = [u * u * dddu, u * du * ddu, du.powi(3), k * du];
            let scale = 1.0 + terms.iter().map(|t| t.abs()).sum::<f64>();
            prop_assert!(p.third_order_residual(u, du, ddu, dddu).abs() < 1e-12 * scale);
        }
        prop_assert!(s.c_drift < 1e-9 * (1.0 + s.c.abs()));
    }
}
