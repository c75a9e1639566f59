//! `x(u) = ∫_{u₀}^{u} √(v^{n−2} / P(v)) dv` for `P(v) = c − k̄vⁿ + kv^{n−2}`.
//!
//! At a simple root `u₀` the integrand blows up like `(v − u₀)^{-1/2}`; the
//! substitution `v = u₀ + s²` turns it into a smooth integrand. `P(u₀ + s²)/s²`
//! is evaluated from the exact Taylor expansion of the polynomial at `u₀`,
//! which avoids cancellation near the root. If the interval reaches towards
//! the next root `u₂`, the upper half uses `v = u₂ − s²` instead.

use serde::{Deserialize, Serialize};

use crate::classify::{positive_roots, WarpPolynomial};
use crate::error::{Error, Result};

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1], at published precision.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature; returns `(value, error estimate)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32) -> (f64, f64) {
        if whole.1 <= tol.max(1e-15 * whole.0.abs()) || depth >= 48 {
            return whole;
        }
        let m = 0.5 * (a + b);
        let left = gk15(f, a, m);
        let right = gk15(f, m, b);
        let l = rec(f, a, m, left, 0.5 * tol, depth + 1);
        let r = rec(f, m, b, right, 0.5 * tol, depth + 1);
        (l.0 + r.0, l.1 + r.1)
    }
    if a == b {
        return (0.0, 0.0);
    }
    rec(f, a, b, gk15(f, a, b), tol, 0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureResult {
    /// Distance `x(u) − x(u₀)`; infinite when the integral diverges.
    pub x: f64,
    pub error_estimate: f64,
    /// True at a double root: `x` grows like `a·|log(u − u₀)|`.
    pub diverges: bool,
    /// The coefficient `a = √(2u₀^{n−2}/P''(u₀))` of the logarithmic
    /// divergence, equal to `1/√(−n k̄)` at a double root.
    pub log_coefficient: Option<f64>,
}

/// Parameter distance from the root `u₀` of `P` to the value `u > u₀`.
pub fn quadrature_x_of_u(n: usize, k_bar: f64, k: f64, c: f64, u0: f64, u: f64) -> Result<QuadratureResult> {
    let poly = WarpPolynomial::new(n, k_bar, k, c)?;
    if !(u0 > 0.0) {
        return Err(Error::invalid("the root u₀ must be positive"));
    }
    if !(u > u0) {
        return Err(Error::invalid(format!("need u > u₀, got u = {u}, u₀ = {u0}")));
    }
    let scale = poly.scale(u0);
    if poly.eval(u0).abs() > 1e-8 * scale {
        return Err(Error::invalid(format!(
            "u₀ = {u0} is not a root of P (P(u₀) = {})",
            poly.eval(u0)
        )));
    }
    let taylor0 = poly.taylor(u0);
    if taylor0[1].abs() <= 1e-7 * scale / u0 {
        let a = (2.0 * u0.powi(n as i32 - 2) / (2.0 * taylor0[2])).sqrt();
        return Ok(QuadratureResult {
            x: f64::INFINITY,
            error_estimate: 0.0,
            diverges: true,
            log_coefficient: Some(a),
        });
    }
    // P must stay positive on (u0, u]
    let samples = 256;
    for i in 1..=samples {
        let v = u0 + (u - u0) * i as f64 / samples as f64;
        if poly.eval(v) <= 0.0 && i < samples {
            return Err(Error::invalid(format!("P(v) ≤ 0 at v = {v} inside (u₀, u]")));
        }
    }

    let m = n as i32 - 2;
    // smooth integrand after v = r ± s², with P(r ± s²)/s² from Taylor data
    let integrand = |root: f64, coeffs: &[f64], sign: f64, s: f64| -> f64 {
        let s2 = s * s;
        let mut q = 0.0;
        for j in (1..coeffs.len()).rev() {
            q = q * s2 + coeffs[j] * sign.powi(j as i32);
        }
        let v = root + sign * s2;
        2.0 * (v.powi(m) / q).sqrt()
    };

    let next_root = positive_roots(&poly)
        .into_iter()
        .map(|r| r.value)
        .find(|&r| r > u0 + 1e-12 * u0);
    let tol = 1e-14;
    let (mut x, mut err) = (0.0, 0.0);
    match next_root {
        Some(u2) if u > 0.5 * (u0 + u2) => {
            let mid = 0.5 * (u0 + u2);
            let (a, ea) = integrate_adaptive(&|s| integrand(u0, &taylor0, 1.0, s), 0.0, (mid - u0).sqrt(), tol);
            let taylor2 = poly.taylor(u2);
            // within rounding of the root, sqrt would amplify the noise
            let gap = if u2 - u <= 1e-12 * u2 { 0.0 } else { u2 - u };
            let lo = gap.sqrt();
            let (b, eb) = integrate_adaptive(&|s| integrand(u2, &taylor2, -1.0, s), lo, (u2 - mid).sqrt(), tol);
            x += a + b;
            err += ea + eb;
        }
        _ => {
            let (a, ea) = integrate_adaptive(&|s| integrand(u0, &taylor0, 1.0, s), 0.0, (u - u0).sqrt(), tol);
            x += a;
            err += ea;
        }
    }
    Ok(QuadratureResult {
        x,
        error_estimate: err,
        diverges: false,
        log_coefficient: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_polynomials_and_sqrt() {
        let (v, _) = integrate_adaptive(&|x: f64| x.powi(6), 0.0, 1.0, 1e-15);
        assert!((v - 1.0 / 7.0).abs() < 1e-15);
        let (v, _) = integrate_adaptive(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-14);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ejiri_quarter_period() {
        // u = sqrt(2 + cos x): from the minimum u = 1 (x = π) to u, x = π − acos(u² − 2)
        let u = 1.5f64;
        let r = quadrature_x_of_u(4, 0.25, 1.0, -0.75, 1.0, u).unwrap();
        let expected = std::f64::consts::PI - (u * u - 2.0).acos();
        assert!((r.x - expected).abs() < 1e-12, "{} vs {expected}", r.x);
        let r = quadrature_x_of_u(4, 0.25, 1.0, -0.75, 1.0, 3f64.sqrt()).unwrap();
        assert!((r.x - std::f64::consts::PI).abs() < 1e-12, "{}", r.x);
    }

    #[test]
    fn double_root_diverges() {
        let r = quadrature_x_of_u(4, -1.0, -2.0, 1.0, 1.0, 2.0).unwrap();
        assert!(r.diverges);
        assert!((r.log_coefficient.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn invalid_arguments() {
        assert!(quadrature_x_of_u(4, 0.25, 1.0, -0.75, 1.2, 1.5).is_err());
        assert!(quadrature_x_of_u(4, 0.25, 1.0, -0.75, 1.0, 0.9).is_err());
        assert!(quadrature_x_of_u(4, 0.25, 1.0, -0.75, 1.0, 1.9).is_err());
    }
}
