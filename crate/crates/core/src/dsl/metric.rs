//! Metric descriptions and their jet evaluation.

use std::fmt;

use nalgebra::DMatrix;

use crate::dsl::expr::Expr;
use crate::error::{Error, Result};
use crate::jets::{jet_apply, Elementary, Jet2, JetError};

/// Smallest magnitude accepted for a conformal scale (and its inverse).
pub const CONFORMAL_EPS: f64 = 1e-6;

/// Parsed metric. Every expression is resolved against the chart of the node
/// that owns it: `diag`/`sym` coefficients against their declared names, a
/// warping function against the base chart, a conformal scale against the
/// inner chart.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    Diag {
        coords: Vec<String>,
        signs: Vec<f64>,
        coeffs: Vec<Expr>,
    },
    /// Full symmetric matrix given by its upper triangle, row major.
    Sym {
        coords: Vec<String>,
        entries: Vec<Expr>,
    },
    Product(Box<MetricSpec>, Box<MetricSpec>),
    /// `base + warp^2 * fiber`.
    Warped {
        base: Box<MetricSpec>,
        warp: Expr,
        fiber: Box<MetricSpec>,
    },
    /// `factor^2 * inner`; the conformal function in `phi^-2 g` form is
    /// `phi = 1/factor`.
    Conformal {
        factor: Expr,
        inner: Box<MetricSpec>,
    },
    /// Unit round sphere in iterated polar coordinates, times `sign`.
    Sphere {
        n: usize,
        sign: f64,
        names: Option<Vec<String>>,
    },
    /// Hyperbolic space of curvature -1 in geodesic polar coordinates.
    Hyperbolic {
        n: usize,
        sign: f64,
        names: Option<Vec<String>>,
    },
    Flat {
        n: usize,
        signs: Option<Vec<f64>>,
        names: Option<Vec<String>>,
    },
    /// `-2H du^2 - 2 du dv + dx^2 + dy^2` in coordinates `(u, v, x, y)`.
    PpWave {
        h: Expr,
    },
    /// Reference to a catalog entry, expanded at parse time.
    Named {
        name: String,
        inner: Box<MetricSpec>,
    },
}

/// Metric coefficients as jets, row-major `dim x dim`.
#[derive(Debug, Clone)]
pub struct MetricJets {
    pub dim: usize,
    pub entries: Vec<Jet2>,
}

impl MetricJets {
    pub fn get(&self, i: usize, j: usize) -> &Jet2 {
        &self.entries[i * self.dim + j]
    }

    pub fn values(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j).value())
    }
}

impl MetricSpec {
    pub fn parse(text: &str) -> Result<Self> {
        crate::dsl::parser::parse_metric(text)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Diag { coords, .. } | Self::Sym { coords, .. } => coords.len(),
            Self::Product(a, b) => a.dim() + b.dim(),
            Self::Warped { base, fiber, .. } => base.dim() + fiber.dim(),
            Self::Conformal { inner, .. } | Self::Named { inner, .. } => inner.dim(),
            Self::Sphere { n, .. } | Self::Hyperbolic { n, .. } | Self::Flat { n, .. } => *n,
            Self::PpWave { .. } => 4,
        }
    }

    /// Coordinate names of the full chart. Collisions in a product or warped
    /// product are resolved by suffixing the right-hand name with `_k`, the
    /// smallest `k >= 2` not yet taken.
    pub fn coordinates(&self) -> Vec<String> {
        match self {
            Self::Diag { coords, .. } | Self::Sym { coords, .. } => coords.clone(),
            Self::Product(a, b) => merge_names(a.coordinates(), b.coordinates()),
            Self::Warped { base, fiber, .. } => merge_names(base.coordinates(), fiber.coordinates()),
            Self::Conformal { inner, .. } | Self::Named { inner, .. } => inner.coordinates(),
            Self::Sphere { n, names, .. } | Self::Hyperbolic { n, names, .. } => {
                names.clone().unwrap_or_else(|| polar_names(*n))
            }
            Self::Flat { n, names, .. } => names
                .clone()
                .unwrap_or_else(|| (1..=*n).map(|i| format!("x{i}")).collect()),
            Self::PpWave { .. } => ppwave_names(),
        }
    }

    /// Binds all expressions to their local charts.
    pub fn resolve(&mut self) -> Result<()> {
        fn bind(e: &mut Expr, chart: &[String]) -> Result<()> {
            e.resolve(chart).map_err(|name| Error::UnknownSymbol {
                name,
                declared: chart.join(", "),
            })
        }
        match self {
            Self::Diag { coords, coeffs, .. } => coeffs.iter_mut().try_for_each(|e| bind(e, coords)),
            Self::Sym { coords, entries } => entries.iter_mut().try_for_each(|e| bind(e, coords)),
            Self::Product(a, b) => {
                a.resolve()?;
                b.resolve()
            }
            Self::Warped { base, warp, fiber } => {
                base.resolve()?;
                fiber.resolve()?;
                bind(warp, &base.coordinates())
            }
            Self::Conformal { factor, inner } => {
                inner.resolve()?;
                bind(factor, &inner.coordinates())
            }
            Self::PpWave { h } => bind(h, &ppwave_names()),
            Self::Named { .. } | Self::Sphere { .. } | Self::Hyperbolic { .. } | Self::Flat { .. } => Ok(()),
        }
    }

    /// Metric jets at `point` (values, first and second derivatives).
    pub fn evaluate(&self, point: &[f64]) -> Result<MetricJets> {
        self.check_point(point)?;
        let vars = Jet2::coordinates(point);
        let entries = self.eval_local(&vars, point)?;
        Ok(MetricJets {
            dim: point.len(),
            entries,
        })
    }

    /// Metric values only. Evaluates with derivative-free jets, so it is an
    /// independent path from [`MetricSpec::evaluate`] for finite-difference
    /// checks.
    pub fn values_at(&self, point: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(point)?;
        let vars: Vec<Jet2> = point.iter().map(|&x| Jet2::constant(x, 0)).collect();
        let entries = self.eval_local(&vars, point)?;
        let d = point.len();
        Ok(DMatrix::from_fn(d, d, |i, j| entries[i * d + j].value()))
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, metric has dimension {}",
                point.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Row-major `d x d` matrix of jets; `vars` are the jets of this node's
    /// local coordinates (their gradient length is the global dimension).
    fn eval_local(&self, vars: &[Jet2], point: &[f64]) -> Result<Vec<Jet2>> {
        let d = vars.len();
        let gdim = vars.first().map_or(0, Jet2::dim);
        let zero = Jet2::zero(gdim);
        let jet = |r: std::result::Result<Jet2, JetError>| r.map_err(|e| Error::from_jet(e, point));
        let mut out = vec![zero.clone(); d * d];
        match self {
            Self::Diag { signs, coeffs, .. } => {
                for (i, (s, c)) in signs.iter().zip(coeffs).enumerate() {
                    out[i * d + i] = jet(c.eval_jet(vars))?.scale(*s);
                }
            }
            Self::Sym { entries, .. } => {
                let mut k = 0;
                for i in 0..d {
                    for j in i..d {
                        let v = jet(entries[k].eval_jet(vars))?;
                        out[j * d + i] = v.clone();
                        out[i * d + j] = v;
                        k += 1;
                    }
                }
            }
            Self::Product(a, b) => {
                let da = a.dim();
                let ga = a.eval_local(&vars[..da], point)?;
                let gb = b.eval_local(&vars[da..], point)?;
                place_block(&mut out, d, 0, da, ga);
                place_block(&mut out, d, da, d - da, gb);
            }
            Self::Warped { base, warp, fiber } => {
                let db = base.dim();
                let gb = base.eval_local(&vars[..db], point)?;
                let w = jet(warp.eval_jet(&vars[..db]))?;
                let w2 = &w * &w;
                let gf: Vec<Jet2> = fiber
                    .eval_local(&vars[db..], point)?
                    .iter()
                    .map(|e| {
                        if e.value() == 0.0 && e.is_constant() {
                            e.clone()
                        } else {
                            &w2 * e
                        }
                    })
                    .collect();
                place_block(&mut out, d, 0, db, gb);
                place_block(&mut out, d, db, d - db, gf);
            }
            Self::Conformal { factor, inner } => {
                let s = jet(factor.eval_jet(vars))?;
                let a = s.value().abs();
                if !(CONFORMAL_EPS..=1.0 / CONFORMAL_EPS).contains(&a) {
                    return Err(Error::ConformalZero { point: point.to_vec() });
                }
                let s2 = &s * &s;
                out = inner
                    .eval_local(vars, point)?
                    .iter()
                    .map(|e| {
                        if e.value() == 0.0 && e.is_constant() {
                            e.clone()
                        } else {
                            &s2 * e
                        }
                    })
                    .collect();
            }
            Self::Named { inner, .. } => out = inner.eval_local(vars, point)?,
            Self::Sphere { sign, .. } | Self::Hyperbolic { sign, .. } => {
                let first = if matches!(self, Self::Sphere { .. }) {
                    Elementary::Sin
                } else {
                    Elementary::Sinh
                };
                // g_00 = 1, g_ii = f(r)^2 sin^2(p1) ... sin^2(p_{i-1})
                let mut acc = Jet2::constant(1.0, gdim);
                out[0] = acc.scale(*sign);
                for i in 1..d {
                    let f = if i == 1 { first } else { Elementary::Sin };
                    let s = jet(jet_apply(f, &vars[i - 1]))?;
                    acc = &acc * &(&s * &s);
                    out[i * d + i] = acc.scale(*sign);
                }
            }
            Self::Flat { signs, .. } => {
                for i in 0..d {
                    let s = signs.as_ref().map_or(1.0, |s| s[i]);
                    out[i * d + i] = Jet2::constant(s, gdim);
                }
            }
            Self::PpWave { h } => {
                let hv = jet(h.eval_jet(vars))?;
                out[0] = hv.scale(-2.0);
                out[1] = Jet2::constant(-1.0, gdim);
                out[4] = Jet2::constant(-1.0, gdim);
                out[2 * 4 + 2] = Jet2::constant(1.0, gdim);
                out[3 * 4 + 3] = Jet2::constant(1.0, gdim);
            }
        }
        Ok(out)
    }

    /// Visits every node depth-first.
    pub fn walk(&self, f: &mut impl FnMut(&MetricSpec)) {
        f(self);
        match self {
            Self::Product(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Self::Warped { base, fiber, .. } => {
                base.walk(f);
                fiber.walk(f);
            }
            Self::Conformal { inner, .. } | Self::Named { inner, .. } => inner.walk(f),
            _ => {}
        }
    }

    /// The metric with any top-level catalog reference expanded.
    pub fn expanded(&self) -> &MetricSpec {
        match self {
            Self::Named { inner, .. } => inner.expanded(),
            other => other,
        }
    }
}

fn place_block(out: &mut [Jet2], d: usize, offset: usize, size: usize, block: Vec<Jet2>) {
    for (k, v) in block.into_iter().enumerate() {
        let (i, j) = (k / size, k % size);
        out[(offset + i) * d + offset + j] = v;
    }
}

fn ppwave_names() -> Vec<String> {
    ["u", "v", "x", "y"].iter().map(|s| s.to_string()).collect()
}

fn polar_names(n: usize) -> Vec<String> {
    std::iter::once("r".to_string())
        .chain((1..n).map(|i| format!("p{i}")))
        .collect()
}

fn merge_names(left: Vec<String>, right: Vec<String>) -> Vec<String> {
    let mut out = left;
    for name in right {
        if !out.contains(&name) {
            out.push(name);
            continue;
        }
        let mut k = 2;
        while out.contains(&format!("{name}_{k}")) {
            k += 1;
        }
        out.push(format!("{name}_{k}"));
    }
    out
}

/// Evaluated metric plus its signature (count of negative eigenvalues first).
pub fn evaluate_metric(spec: &MetricSpec, point: &[f64]) -> Result<(MetricJets, Signature)> {
    let jets = spec.evaluate(point)?;
    let g = jets.values();
    crate::curvature::check_nonsingular(&g, point)?;
    let signature = Signature::of(&g);
    Ok((jets, signature))
}

/// Signs of the eigenvalues of a metric at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Signature {
    pub negative: usize,
    pub positive: usize,
}

impl Signature {
    pub fn of(g: &DMatrix<f64>) -> Self {
        let eig = g.clone().symmetric_eigenvalues();
        let negative = eig.iter().filter(|&&v| v < 0.0).count();
        Self {
            negative,
            positive: eig.len() - negative,
        }
    }

    pub fn is_riemannian(&self) -> bool {
        self.negative == 0
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.negative, self.positive)
    }
}

fn write_signs(f: &mut fmt::Formatter<'_>, signs: &[f64]) -> fmt::Result {
    let parts: Vec<&str> = signs.iter().map(|&s| if s < 0.0 { "-1" } else { "+1" }).collect();
    f.write_str(&parts.join(","))
}

fn write_exprs(f: &mut fmt::Formatter<'_>, exprs: &[Expr]) -> fmt::Result {
    for (i, e) in exprs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Diag { coords, signs, coeffs } => {
                write!(f, "diag({}; ", coords.join(","))?;
                write_signs(f, signs)?;
                f.write_str("; ")?;
                write_exprs(f, coeffs)?;
                f.write_str(")")
            }
            Self::Sym { coords, entries } => {
                write!(f, "sym({}; ", coords.join(","))?;
                write_exprs(f, entries)?;
                f.write_str(")")
            }
            Self::Product(a, b) => write!(f, "product({a}, {b})"),
            Self::Warped { base, warp, fiber } => write!(f, "warped({base}, {warp}, {fiber})"),
            Self::Conformal { factor, inner } => write!(f, "conformal({factor}, {inner})"),
            Self::Sphere { n, sign, names } | Self::Hyperbolic { n, sign, names } => {
                let head = if matches!(self, Self::Sphere { .. }) {
                    "sphere"
                } else {
                    "hyperbolic"
                };
                write!(f, "{head}({n}")?;
                if *sign < 0.0 {
                    f.write_str("; -1")?;
                }
                if let Some(names) = names {
                    write!(f, "; {}", names.join(","))?;
                }
                f.write_str(")")
            }
            Self::Flat { n, signs, names } => {
                write!(f, "flat({n}")?;
                if let Some(signs) = signs {
                    f.write_str("; ")?;
                    write_signs(f, signs)?;
                }
                if let Some(names) = names {
                    write!(f, "; {}", names.join(","))?;
                }
                f.write_str(")")
            }
            Self::PpWave { h } => write!(f, "ppwave(H={h})"),
            Self::Named { name, .. } => write!(f, "catalog({name})"),
        }
    }
}
