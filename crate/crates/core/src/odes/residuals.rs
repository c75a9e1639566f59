//! Grid checks for the equations that make `φ⁻²(εdt² + g*)`-type metrics
//! Einstein.

use serde::{Deserialize, Serialize};

use crate::curvature::{sweep, Geometry};
use crate::dsl::{Expr, MetricSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfProductReport {
    /// Max of `|φ Ric* + (n−1) ∇*²φ|`.
    pub hessian_residual: f64,
    /// Max of `||grad φ|² + φ²k* + k̄|`.
    pub trace_residual: f64,
    /// Mean of `S*/(n(n−1))` over the grid.
    pub k_star: f64,
    pub k_star_spread: f64,
    pub hessian_pass: bool,
    pub trace_pass: bool,
    pub tol: f64,
    pub pass: bool,
}

/// Checks `φ Ric* + (n−1)∇*²φ = 0` and `|grad φ|² + φ²k* + k̄ = 0` on `g*`,
/// with `k*` estimated pointwise from the scalar curvature.
pub fn conf_product_residual(
    phi: &Expr,
    g_star: &MetricSpec,
    n: usize,
    k_bar: f64,
    grid: &[Vec<f64>],
    tol: f64,
) -> Result<ConfProductReport> {
    if n < 2 || n != g_star.dim() {
        return Err(Error::DimensionMismatch(format!(
            "n = {n} must equal dim g* = {} and be at least 2",
            g_star.dim()
        )));
    }
    let nf = n as f64;
    let rows = sweep(grid, false, |p| {
        let geo = Geometry::at(g_star, p)?;
        let jet = geo.scalar_jet(phi)?;
        if jet.value() == 0.0 {
            return Err(Error::ConformalZero { point: p.to_vec() });
        }
        let h = geo.hessian_of(&jet);
        let rep = geo.curvature();
        let k_star = rep.scalar / (nf * (nf - 1.0));
        let eq1 = (rep.ricci_matrix() * h.value + h.hessian_matrix() * (nf - 1.0)).amax();
        Ok((eq1, h.grad_norm2, h.value, k_star))
    })?;
    let k_star = rows.iter().map(|r| r.3).sum::<f64>() / rows.len().max(1) as f64;
    let k_star_spread = rows.iter().fold(0.0f64, |m, r| m.max((r.3 - k_star).abs()));
    let hessian_residual = rows.iter().fold(0.0f64, |m, r| m.max(r.0));
    let trace_residual = rows
        .iter()
        .fold(0.0f64, |m, r| m.max((r.1 + r.2 * r.2 * r.3 + k_bar).abs()));
    let hessian_pass = hessian_residual < tol;
    let trace_pass = trace_residual < tol && k_star_spread < tol;
    Ok(ConfProductReport {
        hessian_residual,
        trace_residual,
        k_star,
        k_star_spread,
        hessian_pass,
        trace_pass,
        tol,
        pass: hessian_pass && trace_pass,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorvinoReport {
    /// Max of `|f Ric* − ∇*²f + Δ*f g*|`.
    pub residual: f64,
    /// Max of `|f S* + (n−1) Δ*f|`.
    pub trace_residual: f64,
    /// Spread of the scalar curvature over the grid, which must vanish when
    /// the equation holds.
    pub scalar_spread: f64,
    pub scalar_mean: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Checks `f Ric* − ∇*²f + Δ*f g* = 0` and its trace on a grid.
pub fn corvino_residual(f: &Expr, g_star: &MetricSpec, grid: &[Vec<f64>], tol: f64) -> Result<CorvinoReport> {
    let nf = g_star.dim() as f64;
    let rows = sweep(grid, false, |p| {
        let geo = Geometry::at(g_star, p)?;
        let h = geo.hessian_of(&geo.scalar_jet(f)?);
        let rep = geo.curvature();
        let m = rep.ricci_matrix() * h.value - h.hessian_matrix() + &geo.g * h.laplacian;
        let tr = h.value * rep.scalar + (nf - 1.0) * h.laplacian;
        Ok((m.amax(), tr.abs(), rep.scalar))
    })?;
    let count = rows.len().max(1) as f64;
    let scalar_mean = rows.iter().map(|r| r.2).sum::<f64>() / count;
    let scalar_spread = rows.iter().fold(0.0f64, |m, r| m.max((r.2 - scalar_mean).abs()));
    let residual = rows.iter().fold(0.0f64, |m, r| m.max(r.0));
    let trace_residual = rows.iter().fold(0.0f64, |m, r| m.max(r.1));
    Ok(CorvinoReport {
        residual,
        trace_residual,
        scalar_spread,
        scalar_mean,
        tol,
        pass: residual < tol && trace_residual < tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::scalar_on;
    use crate::grid::DomainBox;

    fn grid(spec: &MetricSpec, lo: f64, hi: f64) -> Vec<Vec<f64>> {
        let names = spec.coordinates();
        let n = names.len();
        DomainBox::new(names, vec![[lo, hi]; n]).unwrap().halton(16)
    }

    #[test]
    fn constant_on_flat_space() {
        let g = MetricSpec::parse("flat(3)").unwrap();
        let one = scalar_on(&g, "1").unwrap();
        let rep = conf_product_residual(&one, &g, 3, 0.0, &grid(&g, -1.0, 1.0), 1e-9).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.k_star, 0.0);
        let c = corvino_residual(&one, &g, &grid(&g, -1.0, 1.0), 1e-9).unwrap();
        assert!(c.pass);
    }

    #[test]
    fn linear_function_on_sphere_is_not_static() {
        let g = MetricSpec::parse("sphere(3)").unwrap();
        let f = scalar_on(&g, "r").unwrap();
        let rep = corvino_residual(&f, &g, &grid(&g, 0.3, 1.3), 1e-7).unwrap();
        assert!(!rep.pass && rep.residual > 0.1);
    }

    #[test]
    fn dimension_must_match() {
        let g = MetricSpec::parse("flat(3)").unwrap();
        let one = scalar_on(&g, "1").unwrap();
        assert!(conf_product_residual(&one, &g, 4, 0.0, &grid(&g, 0.0, 1.0), 1e-9).is_err());
    }
}
