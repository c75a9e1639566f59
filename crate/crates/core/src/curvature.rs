//! Christoffel symbols, curvature tensors and Hessians from metric jets.
//!
//! Sign conventions: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z` and
//! `Ric(Y,Z) = trace(X ↦ R(X,Y)Z)`, so the unit sphere has positive Ricci
//! curvature. Components are stored as
//! `riemann[l][i][j][k] = dx^l(R(∂_i, ∂_j)∂_k)`, giving
//! `Ric_jk = Σ_i riemann[i][i][j][k]`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsl::{Expr, MetricSpec, Signature};
use crate::error::{Error, Result};
use crate::jets::Jet2;

/// Relative determinant threshold below which a metric counts as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

/// Rejects metrics with `|det g| < 1e-12 * (max |g_ij|)^d`.
pub fn check_nonsingular(g: &DMatrix<f64>, point: &[f64]) -> Result<()> {
    let d = g.nrows() as i32;
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let det = g.clone().lu().determinant();
    if scale == 0.0 || !det.is_finite() || det.abs() < SINGULAR_EPS * scale.powi(d) {
        return Err(Error::Singular {
            point: point.to_vec(),
            det,
        });
    }
    Ok(())
}

/// Connection data at one point, the common input of every tensor below.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub point: Vec<f64>,
    pub dim: usize,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    pub signature: Signature,
    /// `christoffel[(k*d + i)*d + j] = Γ^k_ij`
    pub christoffel: Vec<f64>,
    /// `dchristoffel[((m*d + k)*d + i)*d + j] = ∂_m Γ^k_ij`
    pub dchristoffel: Vec<f64>,
}

impl Geometry {
    pub fn at(spec: &MetricSpec, point: &[f64]) -> Result<Self> {
        let jets = spec.evaluate(point)?;
        let d = jets.dim;
        let g = jets.values();
        check_nonsingular(&g, point)?;
        let ginv = g.clone().lu().try_inverse().ok_or_else(|| Error::Singular {
            point: point.to_vec(),
            det: 0.0,
        })?;
        let signature = Signature::of(&g);

        let dg = |l: usize, i: usize, j: usize| jets.get(i, j).gradient()[l];
        let ddg = |m: usize, l: usize, i: usize, j: usize| jets.get(i, j).hessian(m, l);

        // Christoffel symbols of the first kind, Γ_lij
        let mut first = vec![0.0; d * d * d];
        for l in 0..d {
            for i in 0..d {
                for j in i..d {
                    let v = 0.5 * (dg(i, l, j) + dg(j, l, i) - dg(l, i, j));
                    first[(l * d + i) * d + j] = v;
                    first[(l * d + j) * d + i] = v;
                }
            }
        }
        let mut christoffel = vec![0.0; d * d * d];
        for k in 0..d {
            for i in 0..d {
                for j in i..d {
                    let v: f64 = (0..d).map(|l| ginv[(k, l)] * first[(l * d + i) * d + j]).sum();
                    christoffel[(k * d + i) * d + j] = v;
                    christoffel[(k * d + j) * d + i] = v;
                }
            }
        }

        // ∂_m g^{kl} = -g^{ka} ∂_m g_ab g^{bl}
        let mut dginv = vec![0.0; d * d * d];
        for m in 0..d {
            let dgm = DMatrix::from_fn(d, d, |a, b| dg(m, a, b));
            let prod = -(&ginv * dgm * &ginv);
            for k in 0..d {
                for l in 0..d {
                    dginv[(m * d + k) * d + l] = prod[(k, l)];
                }
            }
        }

        let mut dchristoffel = vec![0.0; d * d * d * d];
        for m in 0..d {
            for k in 0..d {
                for i in 0..d {
                    for j in i..d {
                        let mut v = 0.0;
                        for l in 0..d {
                            let dfirst = 0.5 * (ddg(m, i, l, j) + ddg(m, j, l, i) - ddg(m, l, i, j));
                            v += dginv[(m * d + k) * d + l] * first[(l * d + i) * d + j] + ginv[(k, l)] * dfirst;
                        }
                        dchristoffel[((m * d + k) * d + i) * d + j] = v;
                        dchristoffel[((m * d + k) * d + j) * d + i] = v;
                    }
                }
            }
        }

        Ok(Self {
            point: point.to_vec(),
            dim: d,
            g,
            ginv,
            signature,
            christoffel,
            dchristoffel,
        })
    }

    #[inline]
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.christoffel[(k * self.dim + i) * self.dim + j]
    }

    #[inline]
    fn dgamma(&self, m: usize, k: usize, i: usize, j: usize) -> f64 {
        let d = self.dim;
        self.dchristoffel[((m * d + k) * d + i) * d + j]
    }

    /// Full `(1,3)` curvature tensor, indexed `((l*d + i)*d + j)*d + k`.
    pub fn riemann(&self) -> Vec<f64> {
        let d = self.dim;
        let mut r = vec![0.0; d * d * d * d];
        for l in 0..d {
            for i in 0..d {
                for j in (i + 1)..d {
                    for k in 0..d {
                        let mut v = self.dgamma(i, l, j, k) - self.dgamma(j, l, i, k);
                        for m in 0..d {
                            v += self.gamma(l, i, m) * self.gamma(m, j, k) - self.gamma(l, j, m) * self.gamma(m, i, k);
                        }
                        r[((l * d + i) * d + j) * d + k] = v;
                        r[((l * d + j) * d + i) * d + k] = -v;
                    }
                }
            }
        }
        r
    }

    /// Curvature report at this point.
    pub fn curvature(&self) -> CurvatureReport {
        let d = self.dim;
        let riemann = self.riemann();
        let mut ricci = DMatrix::zeros(d, d);
        for j in 0..d {
            for k in j..d {
                let v: f64 = (0..d).map(|i| riemann[((i * d + i) * d + j) * d + k]).sum();
                let w: f64 = (0..d).map(|i| riemann[((i * d + i) * d + k) * d + j]).sum();
                // exact symmetry; the two contractions agree up to rounding
                let s = 0.5 * (v + w);
                ricci[(j, k)] = s;
                ricci[(k, j)] = s;
            }
        }
        let scalar = trace_with(&self.ginv, &ricci);
        let traceless = &ricci - &self.g * (scalar / d as f64);
        CurvatureReport {
            point: self.point.clone(),
            dim: d,
            signature: self.signature,
            christoffel: self.christoffel.clone(),
            riemann,
            ricci: to_rows(&ricci),
            scalar,
            traceless_ricci: to_rows(&traceless),
        }
    }

    /// Covariant Hessian data of a scalar given as a jet in this chart.
    pub fn hessian_of(&self, f: &Jet2) -> HessianSnapshot {
        let d = self.dim;
        let grad = f.gradient().to_vec();
        let hess = DMatrix::from_fn(d, d, |i, j| {
            f.hessian(i, j) - (0..d).map(|k| self.gamma(k, i, j) * grad[k]).sum::<f64>()
        });
        let hess = (&hess + hess.transpose()) * 0.5;
        let laplacian = trace_with(&self.ginv, &hess);
        let mut grad_norm2 = 0.0;
        for i in 0..d {
            for j in 0..d {
                grad_norm2 += self.ginv[(i, j)] * grad[i] * grad[j];
            }
        }
        HessianSnapshot {
            value: f.value(),
            gradient: grad,
            hessian: to_rows(&hess),
            laplacian,
            grad_norm2,
        }
    }

    /// Jet of `f` over this chart.
    pub fn scalar_jet(&self, f: &Expr) -> Result<Jet2> {
        let vars = Jet2::coordinates(&self.point);
        f.eval_jet(&vars).map_err(|e| Error::from_jet(e, &self.point))
    }
}

/// `g^{ij} a_ij`
pub fn trace_with(ginv: &DMatrix<f64>, a: &DMatrix<f64>) -> f64 {
    ginv.component_mul(&a.transpose()).sum()
}

pub(crate) fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub(crate) fn from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let d = rows.len();
    DMatrix::from_fn(d, d, |i, j| rows[i][j])
}

/// Curvature quantities at one point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub point: Vec<f64>,
    pub dim: usize,
    pub signature: Signature,
    /// `Γ^k_ij` at `(k*d + i)*d + j`
    pub christoffel: Vec<f64>,
    /// `R^l_ijk` at `((l*d + i)*d + j)*d + k`
    pub riemann: Vec<f64>,
    pub ricci: Vec<Vec<f64>>,
    pub scalar: f64,
    pub traceless_ricci: Vec<Vec<f64>>,
}

impl CurvatureReport {
    pub fn riemann_at(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim;
        self.riemann[((l * d + i) * d + j) * d + k]
    }

    pub fn ricci_matrix(&self) -> DMatrix<f64> {
        from_rows(&self.ricci)
    }

    pub fn max_abs_ricci(&self) -> f64 {
        self.ricci.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_riemann(&self) -> f64 {
        self.riemann.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest violation of the first Bianchi identity.
    pub fn bianchi_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        let s = self.riemann_at(l, i, j, k) + self.riemann_at(l, j, k, i) + self.riemann_at(l, k, i, j);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

/// Gradient, Hessian, Laplacian and squared gradient norm of a scalar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HessianSnapshot {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
    pub laplacian: f64,
    /// `g^{ij} ∂_i f ∂_j f`, signed in indefinite signature.
    pub grad_norm2: f64,
}

impl HessianSnapshot {
    pub fn hessian_matrix(&self) -> DMatrix<f64> {
        from_rows(&self.hessian)
    }
}

pub fn curvature_at(spec: &MetricSpec, point: &[f64]) -> Result<CurvatureReport> {
    Ok(Geometry::at(spec, point)?.curvature())
}

/// `f` must be resolved against `spec.coordinates()`.
pub fn hessian_at(f: &Expr, spec: &MetricSpec, point: &[f64]) -> Result<HessianSnapshot> {
    let geo = Geometry::at(spec, point)?;
    let jet = geo.scalar_jet(f)?;
    Ok(geo.hessian_of(&jet))
}

/// Parses `text` as a scalar over the chart of `spec`.
pub fn scalar_on(spec: &MetricSpec, text: &str) -> Result<Expr> {
    let mut e = crate::dsl::parse_expr(text)?;
    let chart = spec.coordinates();
    e.resolve(&chart).map_err(|name| Error::UnknownSymbol {
        name,
        declared: chart.join(", "),
    })?;
    Ok(e)
}

/// Evaluates `f` on every point, in parallel when asked. Output order always
/// follows `points`.
pub fn sweep<T, F>(points: &[Vec<f64>], parallel: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> Result<T> + Sync + Send,
{
    if parallel {
        points.par_iter().map(|p| f(p)).collect()
    } else {
        points.iter().map(|p| f(p)).collect()
    }
}

/// Outcome of an Einstein-condition sweep over a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EinsteinReport {
    pub lambda_hat: f64,
    pub max_residual: f64,
    /// Standard deviation of `S/d` across the grid.
    pub scalar_spread: f64,
    pub max_abs_ricci: f64,
    pub points: usize,
    pub worst_point: Vec<f64>,
    pub tol: f64,
    pub pass: bool,
}

pub fn einstein_residual(spec: &MetricSpec, grid: &[Vec<f64>], tol: f64) -> Result<EinsteinReport> {
    einstein_residual_opts(spec, grid, tol, false)
}

pub fn einstein_residual_opts(
    spec: &MetricSpec,
    grid: &[Vec<f64>],
    tol: f64,
    parallel: bool,
) -> Result<EinsteinReport> {
    if grid.len() < 2 {
        return Err(Error::invalid("the Einstein check needs at least two grid points"));
    }
    let per_point = sweep(grid, parallel, |p| {
        let geo = Geometry::at(spec, p)?;
        let rep = geo.curvature();
        Ok((geo.g, rep.ricci_matrix(), rep.scalar / geo.dim as f64))
    })?;
    let n = per_point.len() as f64;
    let lambda_hat = per_point.iter().map(|x| x.2).sum::<f64>() / n;
    let var = per_point.iter().map(|x| (x.2 - lambda_hat).powi(2)).sum::<f64>() / n;
    let mut max_residual = 0.0f64;
    let mut max_abs_ricci = 0.0f64;
    let mut worst = 0;
    for (idx, (g, ric, _)) in per_point.iter().enumerate() {
        let r = (ric - g * lambda_hat).amax();
        if r > max_residual {
            max_residual = r;
            worst = idx;
        }
        max_abs_ricci = max_abs_ricci.max(ric.amax());
    }
    let scalar_spread = var.sqrt();
    Ok(EinsteinReport {
        lambda_hat,
        max_residual,
        scalar_spread,
        max_abs_ricci,
        points: grid.len(),
        worst_point: grid[worst].clone(),
        tol,
        pass: max_residual < tol && scalar_spread < tol,
    })
}

/// Largest value of a per-point statistic, with the point where it occurs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxReport {
    pub max: f64,
    pub worst_point: Vec<f64>,
    pub points: usize,
}

fn max_over<F>(grid: &[Vec<f64>], parallel: bool, f: F) -> Result<MaxReport>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + Send,
{
    let vals = sweep(grid, parallel, f)?;
    let (mut max, mut worst) = (0.0f64, 0);
    for (i, v) in vals.iter().enumerate() {
        if *v > max {
            max = *v;
            worst = i;
        }
    }
    Ok(MaxReport {
        max,
        worst_point: grid.get(worst).cloned().unwrap_or_default(),
        points: grid.len(),
    })
}

/// `max |Ric_ij|` over the grid.
pub fn ricci_max(spec: &MetricSpec, grid: &[Vec<f64>], parallel: bool) -> Result<MaxReport> {
    max_over(grid, parallel, |p| Ok(curvature_at(spec, p)?.max_abs_ricci()))
}

/// `max |R^l_ijk|` over the grid.
pub fn riemann_max(spec: &MetricSpec, grid: &[Vec<f64>], parallel: bool) -> Result<MaxReport> {
    max_over(grid, parallel, |p| Ok(curvature_at(spec, p)?.max_abs_riemann()))
}

/// Largest deviation from `R^l_ijk = k (g_jk δ^l_i − g_ik δ^l_j)`.
pub fn constant_curvature_residual(spec: &MetricSpec, grid: &[Vec<f64>], k: f64, parallel: bool) -> Result<MaxReport> {
    max_over(grid, parallel, |p| {
        let geo = Geometry::at(spec, p)?;
        let rep = geo.curvature();
        let d = geo.dim;
        let mut worst = 0.0f64;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    for kk in 0..d {
                        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                        let model = k * (geo.g[(j, kk)] * delta(l, i) - geo.g[(i, kk)] * delta(l, j));
                        worst = worst.max((rep.riemann_at(l, i, j, kk) - model).abs());
                    }
                }
            }
        }
        Ok(worst)
    })
}

/// Largest deviation of the Ricci tensor from prescribed components; entries
/// not listed are expected to vanish.
pub fn ricci_components_residual(
    spec: &MetricSpec,
    grid: &[Vec<f64>],
    entries: &[(usize, usize, f64)],
    parallel: bool,
) -> Result<MaxReport> {
    let d = spec.dim();
    let mut expected = DMatrix::zeros(d, d);
    for &(i, j, v) in entries {
        if i >= d || j >= d {
            return Err(Error::DimensionMismatch(format!(
                "Ricci entry ({i}, {j}) outside dimension {d}"
            )));
        }
        expected[(i, j)] = v;
        expected[(j, i)] = v;
    }
    max_over(grid, parallel, |p| {
        Ok((curvature_at(spec, p)?.ricci_matrix() - &expected).amax())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_space_has_no_curvature() {
        let m = MetricSpec::parse("flat(4)").unwrap();
        let rep = curvature_at(&m, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(rep.max_abs_riemann(), 0.0);
        assert_eq!(rep.scalar, 0.0);
    }

    #[test]
    fn unit_two_sphere() {
        let m = MetricSpec::parse("sphere(2)").unwrap();
        let rep = curvature_at(&m, &[1.0, 0.3]).unwrap();
        assert!((rep.scalar - 2.0).abs() < 1e-12);
        let g = m.values_at(&[1.0, 0.3]).unwrap();
        assert!((rep.ricci_matrix() - g).amax() < 1e-12);
        assert!(rep.bianchi_residual() < 1e-12);
    }

    #[test]
    fn hessian_of_quadratic_is_metric() {
        let m = MetricSpec::parse("flat(3)").unwrap();
        let f = scalar_on(&m, "(x1^2 + x2^2 + x3^2)/2").unwrap();
        let h = hessian_at(&f, &m, &[0.5, -1.0, 2.0]).unwrap();
        assert!((h.hessian_matrix() - DMatrix::identity(3, 3)).amax() < 1e-15);
        assert!((h.laplacian - 3.0).abs() < 1e-15);
    }

    #[test]
    fn singular_metric_rejected() {
        let m = MetricSpec::parse("sphere(2)").unwrap();
        assert!(matches!(curvature_at(&m, &[0.0, 0.3]), Err(Error::Singular { .. })));
    }

    #[test]
    fn grid_needs_two_points() {
        let m = MetricSpec::parse("flat(2)").unwrap();
        assert!(einstein_residual(&m, &[vec![0.0, 0.0]], 1e-7).is_err());
    }
}
