mod common;

use einstein_forge::catalog::entries;
use einstein_forge::conformal::{conformal_ricci_delta, power_hessian_check, quasi_einstein_check};
use einstein_forge::curvature::{curvature_at, scalar_on};
use einstein_forge::{ConformalPair, MetricSpec};
use proptest::prelude::*;

use common::random_points;

fn direct_delta(pair: &ConformalPair, p: &[f64]) -> nalgebra::DMatrix<f64> {
    let outer = curvature_at(&pair.outer(), p).unwrap().ricci_matrix();
    let inner = curvature_at(&pair.inner, p).unwrap().ricci_matrix();
    outer - inner
}

#[test]
fn conformal_law_matches_direct_difference_on_catalog() {
    let pairs: Vec<_> = entries()
        .iter()
        .filter_map(|e| {
            let (spec, domain) = e.build().unwrap();
            ConformalPair::from_spec(&spec).map(|p| (e.name.clone(), p, domain))
        })
        .collect();
    assert!(pairs.len() >= 6, "only {} conformal entries", pairs.len());
    for (i, (name, pair, domain)) in pairs.iter().enumerate() {
        for p in random_points(domain, 50, 900 + i as u64) {
            let law = conformal_ricci_delta(pair, &p).unwrap();
            let err = (law - direct_delta(pair, &p)).amax();
            assert!(err < 1e-8, "{name} at {p:?}: {err:e}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn law_holds_for_random_warped_factors(
        a in 0.5f64..2.0,
        b in -0.8f64..0.8,
        t in 0.2f64..1.2,
        r in 0.3f64..1.3,
    ) {
        let inner = MetricSpec::parse("warped(flat(1; t), cosh(t), sphere(2))").unwrap();
        let phi = scalar_on(&inner, &format!("{a} + {b}*sin(t) + 0.1*cos(r)")).unwrap();
        let pair = ConformalPair::new(inner, phi);
        let p = [t, r, 0.7];
        let law = conformal_ricci_delta(&pair, &p).unwrap();
        prop_assert!((law - direct_delta(&pair, &p)).amax() < 1e-8);
    }

    #[test]
    fn exponential_powers_have_proportional_hessians(p in 0.5f64..4.0, x in -1.0f64..1.0) {
        let spec = MetricSpec::parse("flat(1; x)").unwrap();
        let phi = scalar_on(&spec, "exp(x)").unwrap();
        prop_assert!(power_hessian_check(&phi, p, &spec, &[x]).unwrap() < 1e-9);
    }
}

#[test]
fn hyperbolic_cosh_is_quasi_einstein() {
    let spec = MetricSpec::parse("hyperbolic(4)").unwrap();
    let phi = scalar_on(&spec, "cosh(r)").unwrap();
    let grid = vec![vec![0.4, 0.5, 0.6, 0.7], vec![1.1, 0.9, 0.3, 0.2]];
    let rep = quasi_einstein_check(4, &phi, &spec, &grid, 1e-8).unwrap();
    assert!(rep.pass, "{rep:?}");
    for (p, pb) in grid.iter().zip(&rep.phi_bar) {
        assert!((pb - 4.0 * p[0].cosh()).abs() < 1e-8);
    }
}
