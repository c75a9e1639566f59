//! Conformal changes `ḡ = φ⁻² g` and the criteria built on them.
//!
//! With `n = dim g` the Ricci tensors are related by
//!
//! ```text
//! R̄ic − Ric = φ⁻² [ (n−2) φ ∇²φ + (φ Δφ − (n−1) |grad φ|²) g ]
//! ```
//!
//! so `ḡ` is Einstein exactly when `φ (Ric)° + (n−2) (∇²φ)° = 0`, where `°`
//! denotes the trace-free part.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::curvature::{sweep, trace_with, Geometry, HessianSnapshot};
use crate::dsl::{BinOp, Expr, MetricSpec};
use crate::error::{Error, Result};
use crate::jets::{jet_apply, Elementary};

/// A metric `g` together with a conformal function `φ`; the outer metric is
/// `ḡ = φ⁻² g`.
#[derive(Debug, Clone)]
pub struct ConformalPair {
    pub inner: MetricSpec,
    /// Resolved against `inner.coordinates()`.
    pub phi: Expr,
}

impl ConformalPair {
    pub fn new(inner: MetricSpec, phi: Expr) -> Self {
        Self { inner, phi }
    }

    /// Builds the pair from metric text and the text of `φ`.
    pub fn parse(inner: &str, phi: &str) -> Result<Self> {
        let inner = MetricSpec::parse(inner)?;
        let phi = crate::curvature::scalar_on(&inner, phi)?;
        Ok(Self { inner, phi })
    }

    /// Reads a pair off a top-level `conformal(s, g)` node, with `φ = 1/s`.
    pub fn from_spec(spec: &MetricSpec) -> Option<Self> {
        match spec.expanded() {
            MetricSpec::Conformal { factor, inner } => Some(Self {
                inner: (**inner).clone(),
                phi: factor.clone().recip(),
            }),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// The conformally changed metric `φ⁻² g`.
    pub fn outer(&self) -> MetricSpec {
        MetricSpec::Conformal {
            factor: self.phi.clone().recip(),
            inner: Box::new(self.inner.clone()),
        }
    }

    fn phi_at(&self, geo: &Geometry) -> Result<HessianSnapshot> {
        let jet = geo.scalar_jet(&self.phi)?;
        if jet.value() <= 0.0 {
            return Err(Error::invalid(format!(
                "conformal function must be positive, got {} at {:?}",
                jet.value(),
                geo.point
            )));
        }
        Ok(geo.hessian_of(&jet))
    }
}

fn trace_free(a: &DMatrix<f64>, geo: &Geometry) -> DMatrix<f64> {
    let t = trace_with(&geo.ginv, a) / geo.dim as f64;
    a - &geo.g * t
}

/// `R̄ic − Ric` predicted by the transformation law, from data of `g` only.
pub fn conformal_ricci_delta(pair: &ConformalPair, point: &[f64]) -> Result<DMatrix<f64>> {
    let geo = Geometry::at(&pair.inner, point)?;
    let h = pair.phi_at(&geo)?;
    let n = geo.dim as f64;
    let phi = h.value;
    let hess = h.hessian_matrix();
    let scalar_part = phi * h.laplacian - (n - 1.0) * h.grad_norm2;
    Ok((hess * ((n - 2.0) * phi) + &geo.g * scalar_part) / (phi * phi))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
    pub points: usize,
    pub tol: f64,
    pub pass: bool,
}

impl ResidualReport {
    fn from_values(values: Vec<f64>, grid: &[Vec<f64>], tol: f64) -> Self {
        let (mut max, mut worst) = (0.0f64, 0);
        for (i, v) in values.iter().enumerate() {
            if !(*v <= max) {
                max = *v;
                worst = i;
            }
        }
        Self {
            max_residual: max,
            worst_point: grid.get(worst).cloned().unwrap_or_default(),
            points: grid.len(),
            tol,
            pass: max < tol,
        }
    }
}

/// Max over the grid of `|φ (Ric)° + (n−2) (∇²φ)°|`.
pub fn conformally_einstein_residual(pair: &ConformalPair, grid: &[Vec<f64>], tol: f64) -> Result<ResidualReport> {
    conformally_einstein_residual_opts(pair, grid, tol, false)
}

pub fn conformally_einstein_residual_opts(
    pair: &ConformalPair,
    grid: &[Vec<f64>],
    tol: f64,
    parallel: bool,
) -> Result<ResidualReport> {
    let values = sweep(grid, parallel, |p| {
        let geo = Geometry::at(&pair.inner, p)?;
        let h = pair.phi_at(&geo)?;
        let ric = geo.curvature().ricci_matrix();
        let n = geo.dim as f64;
        let m = trace_free(&ric, &geo) * h.value + trace_free(&h.hessian_matrix(), &geo) * (n - 2.0);
        Ok(m.amax())
    })?;
    Ok(ResidualReport::from_values(values, grid, tol))
}

/// Entrywise residual of
/// `∇²(φ^c) = c φ^{c−1} ∇²φ + c(c−1) φ^{c−2} dφ⊗dφ`.
pub fn power_hessian_check(phi: &Expr, c: f64, spec: &MetricSpec, point: &[f64]) -> Result<f64> {
    let geo = Geometry::at(spec, point)?;
    let jet = geo.scalar_jet(phi)?;
    if jet.value() <= 0.0 {
        return Err(Error::invalid(format!(
            "power identity needs φ > 0, got {} at {point:?}",
            jet.value()
        )));
    }
    let powered = jet_apply(Elementary::Pow(c), &jet).map_err(|e| Error::from_jet(e, point))?;
    let lhs = geo.hessian_of(&powered).hessian_matrix();
    let h = geo.hessian_of(&jet);
    let f = h.value;
    let grad = nalgebra::DVector::from_column_slice(&h.gradient);
    let rhs =
        h.hessian_matrix() * (c * f.powf(c - 1.0)) + (&grad * grad.transpose()) * (c * (c - 1.0) * f.powf(c - 2.0));
    Ok((lhs - rhs).amax())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasiEinsteinReport {
    pub n: usize,
    pub exponent: f64,
    /// Max of `|φ Ric + (n−1) ∇²φ|` on the base.
    pub precondition_residual: f64,
    pub precondition_pass: bool,
    /// Max of `|(n−2)/(n−1) R̄ic − φ̄ ḡ − φ⁻² dφ⊗dφ|`.
    pub max_residual: f64,
    /// `φ̄` recovered from the `ḡ`-trace at every grid point.
    pub phi_bar: Vec<f64>,
    pub tol: f64,
    pub pass: bool,
}

/// Checks that `ḡ = φ^{−2c} g`, `c = (n−1)/(n−2)`, satisfies
/// `(n−2)/(n−1) R̄ic = φ̄ ḡ + φ⁻² dφ⊗dφ` for a scalar `φ̄`, given a base
/// with `φ Ric + (n−1) ∇²φ = 0`.
pub fn quasi_einstein_check(
    n: usize,
    phi: &Expr,
    base: &MetricSpec,
    grid: &[Vec<f64>],
    tol: f64,
) -> Result<QuasiEinsteinReport> {
    if n < 3 || n != base.dim() {
        return Err(Error::DimensionMismatch(format!(
            "quasi-Einstein check needs n = dim(base) >= 3, got n = {n}, dim = {}",
            base.dim()
        )));
    }
    let nf = n as f64;
    let c = (nf - 1.0) / (nf - 2.0);
    let outer = MetricSpec::Conformal {
        factor: Expr::binary(BinOp::Pow, phi.clone(), Expr::Num(-c)),
        inner: Box::new(base.clone()),
    };

    let pre = sweep(grid, false, |p| {
        let geo = Geometry::at(base, p)?;
        let jet = geo.scalar_jet(phi)?;
        let h = geo.hessian_of(&jet);
        let ric = geo.curvature().ricci_matrix();
        Ok((ric * h.value + h.hessian_matrix() * (nf - 1.0)).amax())
    })?;
    let precondition_residual = pre.iter().fold(0.0f64, |m, v| m.max(*v));

    let main = sweep(grid, false, |p| {
        let geo = Geometry::at(&outer, p)?;
        let jet = geo.scalar_jet(phi)?;
        let grad = nalgebra::DVector::from_column_slice(jet.gradient());
        let ric = geo.curvature().ricci_matrix();
        let m = ric * ((nf - 2.0) / (nf - 1.0)) - (&grad * grad.transpose()) / (jet.value() * jet.value());
        let phi_bar = trace_with(&geo.ginv, &m) / nf;
        Ok((phi_bar, (m - &geo.g * phi_bar).amax()))
    })?;
    let max_residual = main.iter().fold(0.0f64, |m, v| m.max(v.1));
    let precondition_pass = precondition_residual < tol;
    Ok(QuasiEinsteinReport {
        n,
        exponent: c,
        precondition_residual,
        precondition_pass,
        max_residual,
        phi_bar: main.iter().map(|v| v.0).collect(),
        tol,
        pass: precondition_pass && max_residual < tol,
    })
}

/// Inputs of the constant bookkeeping for `ḡ = (a(t)+b(s))⁻² (g̃ + g*)`.
#[derive(Debug, Clone)]
pub struct MainTheoremInput {
    /// Univariate, slot 0.
    pub a: Expr,
    /// Univariate, slot 0.
    pub b: Expr,
    pub k_tilde: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub n: usize,
    pub n_star: usize,
    pub t_range: [f64; 2],
    pub s_range: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTheoremConstants {
    pub n: usize,
    pub n_star: usize,
    pub k_tilde: f64,
    pub k_star: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub c: f64,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    /// `N = n + n* − 1`
    pub big_n: usize,
    pub k_bar: f64,
    pub lambda_bar: f64,
}

/// Number of sample points used to confirm that first integrals are constant.
pub const MAIN_THEOREM_SAMPLES: usize = 8;

fn sample_taylor(f: &Expr, range: [f64; 2]) -> Result<Vec<(f64, f64, f64)>> {
    let [lo, hi] = range;
    (0..MAIN_THEOREM_SAMPLES)
        .map(|i| {
            let t = lo + (hi - lo) * (i as f64 + 0.5) / MAIN_THEOREM_SAMPLES as f64;
            let jet = f
                .eval_jet(&[crate::jets::Jet2::coordinate(0, &[t]).expect("1-d")])
                .map_err(|e| Error::from_jet(e, &[t]))?;
            Ok((jet.value(), jet.gradient()[0], jet.hessian(0, 0)))
        })
        .collect()
}

fn constant_value(samples: &[f64], what: &str, tol: f64) -> Result<f64> {
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let spread = samples.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    if spread > tol * (1.0 + mean.abs()) {
        return Err(Error::invalid(format!(
            "{what} is not constant along the samples (spread {spread:e})"
        )));
    }
    Ok(mean)
}

/// Extracts `c, d₁, d₂` from `a'' + ε₁k̃a = ε₁c`, `b'' + ε₂k*b = ε₂c`
/// (`k* = −k̃`) by sampling, checks the couplings `cᵢ = kᵢdᵢ + c²`, and
/// predicts `λ̄ = N k̄` with `k̄ = −(d₁+d₂)`.
pub fn main_theorem_constants(input: &MainTheoremInput) -> Result<MainTheoremConstants> {
    const TOL: f64 = 1e-8;
    let kt = input.k_tilde;
    let ks = -kt;
    let (e1, e2) = (input.eps1, input.eps2);
    if e1.abs() != 1.0 || e2.abs() != 1.0 {
        return Err(Error::invalid("gradient signs must be +1 or -1"));
    }
    let sa = sample_taylor(&input.a, input.t_range)?;
    let sb = sample_taylor(&input.b, input.s_range)?;

    // a'' + ε k a = ε c  =>  c = ε a'' + k a
    let ca: Vec<f64> = sa.iter().map(|&(a, _, a2)| e1 * a2 + kt * a).collect();
    let ca = constant_value(&ca, "a'' + ε₁k̃a", TOL).map_err(|e| Error::invalid(format!("a is not admissible: {e}")))?;
    let cb: Vec<f64> = sb.iter().map(|&(b, _, b2)| e2 * b2 + ks * b).collect();
    let cb =
        constant_value(&cb, "b'' + ε₂k*b", TOL).map_err(|e| Error::invalid(format!("b is not admissible: {e}")))?;
    if (ca - cb).abs() > TOL * (1.0 + ca.abs()) {
        return Err(Error::invalid(format!(
            "a and b give different constants c ({ca} vs {cb})"
        )));
    }
    let c = 0.5 * (ca + cb);

    let d1: Vec<f64> = sa
        .iter()
        .map(|&(a, a1, _)| e1 * a1 * a1 + kt * a * a - 2.0 * a * c)
        .collect();
    let d1 = constant_value(&d1, "d₁", TOL)?;
    let d2: Vec<f64> = sb
        .iter()
        .map(|&(b, b1, _)| e2 * b1 * b1 + ks * b * b - 2.0 * b * c)
        .collect();
    let d2 = constant_value(&d2, "d₂", TOL)?;
    let c1: Vec<f64> = sa.iter().map(|&(_, a1, a2)| a2 * a2 + e1 * kt * a1 * a1).collect();
    let c1 = constant_value(&c1, "c₁", TOL)?;
    let c2: Vec<f64> = sb.iter().map(|&(_, b1, b2)| b2 * b2 + e2 * ks * b1 * b1).collect();
    let c2 = constant_value(&c2, "c₂", TOL)?;
    for (ci, ki, di, label) in [(c1, kt, d1, "c₁"), (c2, ks, d2, "c₂")] {
        let coupled = ki * di + c * c;
        if (ci - coupled).abs() > 1e-7 * (1.0 + ci.abs()) {
            return Err(Error::invalid(format!(
                "coupling {label} = k d + c² fails: {ci} vs {coupled}"
            )));
        }
    }
    let big_n = input.n + input.n_star - 1;
    let k_bar = -(d1 + d2);
    Ok(MainTheoremConstants {
        n: input.n,
        n_star: input.n_star,
        k_tilde: kt,
        k_star: ks,
        eps1: e1,
        eps2: e2,
        c,
        c1,
        c2,
        d1,
        d2,
        big_n,
        k_bar,
        lambda_bar: big_n as f64 * k_bar,
    })
}

/// Parses a function of one variable; its only free symbol (if any) is
/// bound to slot 0.
pub fn univariate(text: &str) -> Result<Expr> {
    let mut e = crate::dsl::parse_expr(text)?;
    let syms: Vec<String> = e.symbols().into_iter().filter(|s| s != "pi").collect();
    if syms.len() > 1 {
        return Err(Error::invalid(format!(
            "`{text}` depends on more than one variable: {}",
            syms.join(", ")
        )));
    }
    let chart = vec![syms.first().cloned().unwrap_or_else(|| "t".to_string())];
    e.resolve(&chart).map_err(|name| Error::UnknownSymbol {
        name,
        declared: chart.join(", "),
    })?;
    Ok(e)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockReport {
    /// Dimension of the first factor.
    pub split: usize,
    /// Max of `|∇²f(∂_x, ∂_y)|` over mixed index pairs and grid points.
    pub max_mixed: f64,
    pub worst_point: Vec<f64>,
    pub tol: f64,
    pub pass: bool,
}

/// On a product chart, checks that the mixed block of `∇²f` vanishes.
pub fn block_structure_check(spec: &MetricSpec, f: &Expr, grid: &[Vec<f64>], tol: f64) -> Result<BlockReport> {
    let split = match spec.expanded() {
        MetricSpec::Product(a, _) => a.dim(),
        _ => return Err(Error::invalid("block structure check needs a product metric")),
    };
    let d = spec.dim();
    let values = sweep(grid, false, |p| {
        let geo = Geometry::at(spec, p)?;
        let h = geo.hessian_of(&geo.scalar_jet(f)?);
        let mut worst = 0.0f64;
        for i in 0..split {
            for j in split..d {
                worst = worst.max(h.hessian[i][j].abs());
            }
        }
        Ok(worst)
    })?;
    let rep = ResidualReport::from_values(values, grid, tol);
    Ok(BlockReport {
        split,
        max_mixed: rep.max_residual,
        worst_point: rep.worst_point,
        tol,
        pass: rep.pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{curvature_at, scalar_on};

    #[test]
    fn homothety_changes_nothing() {
        let pair = ConformalPair::parse("sphere(3)", "2.5").unwrap();
        let p = [0.7, 0.4, 1.1];
        assert!(conformal_ricci_delta(&pair, &p).unwrap().amax() < 1e-14);
        let inner = curvature_at(&pair.inner, &p).unwrap().ricci_matrix();
        let outer = curvature_at(&pair.outer(), &p).unwrap().ricci_matrix();
        assert!((inner - outer).amax() < 1e-12);
    }

    #[test]
    fn exponential_power_identity() {
        let spec = MetricSpec::parse("flat(1; x)").unwrap();
        let phi = scalar_on(&spec, "exp(x)").unwrap();
        for x in [-1.0, 0.0, 0.8] {
            assert!(power_hessian_check(&phi, 2.0, &spec, &[x]).unwrap() < 1e-12);
            assert!(power_hessian_check(&phi, 1.0, &spec, &[x]).unwrap() == 0.0);
        }
        let neg = scalar_on(&spec, "-exp(x)").unwrap();
        assert!(power_hessian_check(&neg, 2.0, &spec, &[0.0]).is_err());
    }

    #[test]
    fn main_theorem_rejects_inadmissible_pairs() {
        let input = MainTheoremInput {
            a: univariate("t^3").unwrap(),
            b: univariate("cosh(s)").unwrap(),
            k_tilde: 1.0,
            eps1: 1.0,
            eps2: 1.0,
            n: 2,
            n_star: 2,
            t_range: [0.2, 1.0],
            s_range: [0.2, 1.0],
        };
        assert!(main_theorem_constants(&input).is_err());
        let mismatch = MainTheoremInput {
            a: univariate("cos(t) + 1").unwrap(),
            ..input
        };
        assert!(main_theorem_constants(&mismatch).is_err());
    }

    #[test]
    fn block_check_needs_product() {
        let spec = MetricSpec::parse("sphere(2)").unwrap();
        let f = scalar_on(&spec, "r").unwrap();
        assert!(block_structure_check(&spec, &f, &[vec![1.0, 1.0]], 1e-9).is_err());
    }
}
