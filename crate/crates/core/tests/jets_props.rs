#![allow(clippy::needless_range_loop)]

use einstein_forge::jets::{jet_apply, Elementary, Jet2};
use einstein_forge::{parse_expr, Expr};
use proptest::prelude::*;

type Reference = fn(f64) -> f64;

fn jet2(v: f64, g: [f64; 2], h: [f64; 3]) -> Jet2 {
    Jet2::from_parts(v, g.to_vec(), vec![h[0], h[1], h[1], h[2]])
}

fn any_jet() -> impl Strategy<Value = Jet2> {
    (
        -3.0f64..3.0,
        prop::array::uniform2(-3.0f64..3.0),
        prop::array::uniform3(-3.0f64..3.0),
    )
        .prop_map(|(v, g, h)| jet2(v, g, h))
}

fn close(a: &Jet2, b: &Jet2, tol: f64) -> bool {
    let mut ok = (a.value() - b.value()).abs() <= tol;
    for i in 0..2 {
        ok &= (a.gradient()[i] - b.gradient()[i]).abs() <= tol;
        for j in 0..2 {
            ok &= (a.hessian(i, j) - b.hessian(i, j)).abs() <= tol;
        }
    }
    ok
}

/// Value, gradient and Hessian of `f` at `p` by fourth-order central
/// differences.
fn fd_taylor(f: &dyn Fn(&[f64]) -> f64, p: &[f64; 2], h: f64) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let at = |dx: f64, dy: f64| f(&[p[0] + dx, p[1] + dy]);
    let w = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    let grad = [
        w.iter().map(|&(s, c)| c * at(s * h, 0.0)).sum::<f64>() / (12.0 * h),
        w.iter().map(|&(s, c)| c * at(0.0, s * h)).sum::<f64>() / (12.0 * h),
    ];
    let w2 = [(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)];
    let hxx = w2.iter().map(|&(s, c)| c * at(s * h, 0.0)).sum::<f64>() / (12.0 * h * h);
    let hyy = w2.iter().map(|&(s, c)| c * at(0.0, s * h)).sum::<f64>() / (12.0 * h * h);
    let mut hxy = 0.0;
    for &(s, a) in &w {
        for &(t, b) in &w {
            hxy += a * b * at(s * h, t * h);
        }
    }
    hxy /= 144.0 * h * h;
    (at(0.0, 0.0), grad, [[hxx, hxy], [hxy, hyy]])
}

fn expression() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        (-2.0f64..2.0).prop_map(|c| format!("{c:?}")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| format!("sin({e})")),
            inner.clone().prop_map(|e| format!("cos({e})")),
            inner.clone().prop_map(|e| format!("exp(tanh({e}))")),
            inner.clone().prop_map(|e| format!("sqrt(1 + ({e})^2)")),
            inner.clone().prop_map(|e| format!("log(2 + sin({e}))")),
            inner.clone().prop_map(|e| format!("cosh(0.5*{e})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("({a}) / (2 + ({b})^2)")),
        ]
    })
}

fn resolved(text: &str) -> Expr {
    let mut e = parse_expr(text).unwrap();
    e.resolve(&["x".to_string(), "y".to_string()]).unwrap();
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms(a in any_jet(), b in any_jet(), c in any_jet()) {
        prop_assert!(close(&(&a + &b), &(&b + &a), 0.0));
        prop_assert!(close(&(&a * &b), &(&b * &a), 1e-12));
        prop_assert!(close(&(&(&a + &b) + &c), &(&a + &(&b + &c)), 1e-12));
        prop_assert!(close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), 1e-9));
        prop_assert!(close(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)), 1e-10));
        prop_assert!(close(&(&a - &a), &Jet2::zero(2), 0.0));
        let one = Jet2::constant(1.0, 2);
        prop_assert!(close(&(&a * &one), &a, 0.0));
    }

    #[test]
    fn division_inverts_multiplication(a in any_jet(), b in any_jet()) {
        prop_assume!(b.value().abs() > 0.3);
        let q = &(&a * &b) / &b;
        prop_assert!(close(&q, &a, 1e-9));
    }

    #[test]
    fn elementary_chain_rule_matches_differences(x in 0.2f64..1.1, y in -1.0f64..1.0) {
        let cases: [(Elementary, Reference); 10] = [
            (Elementary::Sin, f64::sin),
            (Elementary::Cos, f64::cos),
            (Elementary::Tan, f64::tan),
            (Elementary::Sinh, f64::sinh),
            (Elementary::Cosh, f64::cosh),
            (Elementary::Tanh, f64::tanh),
            (Elementary::Exp, f64::exp),
            (Elementary::Log, f64::ln),
            (Elementary::Sqrt, f64::sqrt),
            (Elementary::Pow(-1.5), |v| v.powf(-1.5)),
        ];
        let coords = Jet2::coordinates(&[x, y]);
        // u = x + xy²/10 stays in (0, 1.2) and exercises mixed partials
        let u = &coords[0] + &(&(&coords[0] * &coords[1]) * &coords[1]).scale(0.1);
        for (e, f) in cases {
            let jet = jet_apply(e, &u).unwrap();
            let g = |p: &[f64]| f(p[0] + p[0] * p[1] * p[1] / 10.0);
            let (v, grad, hess) = fd_taylor(&g, &[x, y], 1e-3);
            let scale = 1.0 + v.abs() + grad[0].abs() + hess[0][0].abs();
            prop_assert!((jet.value() - v).abs() < 1e-14 * scale);
            for i in 0..2 {
                prop_assert!((jet.gradient()[i] - grad[i]).abs() < 1e-7 * scale, "{e:?} grad");
                for j in 0..2 {
                    prop_assert!((jet.hessian(i, j) - hess[i][j]).abs() < 1e-5 * scale, "{e:?} hess");
                }
            }
        }
    }

    #[test]
    fn expression_jets_match_differences(text in expression(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let e = resolved(&text);
        let jet = e.eval_jet(&Jet2::coordinates(&[x, y])).unwrap();
        let f = |p: &[f64]| e.eval(p).unwrap();
        let (v, grad, hess) = fd_taylor(&f, &[x, y], 1e-3);
        let scale = 1.0 + v.abs() + grad.iter().map(|g| g.abs()).sum::<f64>()
            + hess.iter().flatten().map(|h| h.abs()).sum::<f64>();
        prop_assert!((jet.value() - v).abs() < 1e-12 * scale);
        for i in 0..2 {
            prop_assert!((jet.gradient()[i] - grad[i]).abs() < 1e-6 * scale);
            for j in 0..2 {
                prop_assert!((jet.hessian(i, j) - hess[i][j]).abs() < 1e-4 * scale);
            }
        }
    }
}
