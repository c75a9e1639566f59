//! Named fixtures: a metric, a coordinate box and the outcome a correct
//! engine must reproduce on it.
//!
//! Entries live as JSON files under `catalog/` and are compiled into the
//! library; [`load_entry`] reads user-supplied files of the same schema.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::quasi_einstein_check;
use crate::curvature::{
    constant_curvature_residual, curvature_at, einstein_residual_opts, ricci_components_residual, ricci_max,
    riemann_max, scalar_on, sweep,
};
use crate::dsl::{MetricEnvelope, MetricSpec};
use crate::error::{Error, Result};
use crate::grid::{DomainBox, DEFAULT_GRID};
use crate::odes::{conf_product_residual, corvino_residual};

/// Default tolerance for catalog checks.
pub const DEFAULT_TOL: f64 = 1e-7;

/// Interval used for coordinates an entry leaves unspecified.
pub const DEFAULT_DOMAIN: [f64; 2] = [0.3, 1.3];

/// A non-Einstein entry must miss the Einstein condition by at least this.
pub const NON_EINSTEIN_MARGIN: f64 = 1e-3;

const SOURCES: &[&str] = &[
    include_str!("../catalog/mercator-n3.json"),
    include_str!("../catalog/mercator-n4.json"),
    include_str!("../catalog/mercator-n5.json"),
    include_str!("../catalog/mercator-hyperbolic.json"),
    include_str!("../catalog/poincare-halfspace.json"),
    include_str!("../catalog/sphere-height.json"),
    include_str!("../catalog/sphere-height-einstein.json"),
    include_str!("../catalog/main-cos-cosh.json"),
    include_str!("../catalog/main-cos-exp.json"),
    include_str!("../catalog/main-cos-sinh.json"),
    include_str!("../catalog/main-quadratic.json"),
    include_str!("../catalog/main-compact.json"),
    include_str!("../catalog/calabi-ricci-flat.json"),
    include_str!("../catalog/calabi-beltrami-surface.json"),
    include_str!("../catalog/ppwave-harmonic.json"),
    include_str!("../catalog/ppwave-nonharmonic.json"),
    include_str!("../catalog/ppwave-case1.json"),
    include_str!("../catalog/ppwave-case2.json"),
    include_str!("../catalog/ppwave-case3.json"),
    include_str!("../catalog/warp-nonstandard.json"),
    include_str!("../catalog/warp-cosh.json"),
    include_str!("../catalog/warp-exp.json"),
    include_str!("../catalog/warp-ejiri.json"),
    include_str!("../catalog/corvino-cosh.json"),
    include_str!("../catalog/complete-cos-exp.json"),
    include_str!("../catalog/complete-cos-cosh.json"),
    include_str!("../catalog/complete-cos-sinh.json"),
    include_str!("../catalog/flatexample.json"),
    include_str!("../catalog/sinh-cosh-hyperbolic.json"),
    include_str!("../catalog/cleyton.json"),
    include_str!("../catalog/quasi-einstein-hyperbolic.json"),
    include_str!("../catalog/quasi-einstein-not-einstein.json"),
    include_str!("../catalog/fubini-study.json"),
    include_str!("../catalog/non-standard-mercator.json"),
    include_str!("../catalog/product-sphere-flat.json"),
];

/// What a fixture must satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    /// `Ric = λ g` with the given `λ`.
    Einstein {
        lambda: f64,
    },
    RicciFlat,
    /// Vanishing Riemann tensor.
    Flat,
    /// Constant sectional curvature `k`.
    ConstantCurvature {
        k: f64,
    },
    /// Fails the Einstein check by a clear margin.
    NonEinstein,
    /// Ricci components `(i, j, value)`; unlisted entries vanish.
    RicciComponents {
        entries: Vec<(usize, usize, f64)>,
    },
    /// Scalar curvature equal to an expression in the coordinates.
    ScalarCurvature {
        expr: String,
    },
    /// The metric is the base `g` of `φ^{−2c} g`.
    QuasiEinstein {
        phi: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi_bar: Option<String>,
    },
    /// The metric is `g*` in `φ⁻²(dt² + g*)`.
    ConfProduct {
        phi: String,
        k_bar: f64,
    },
    /// The metric is `g*` in `±f² dt² + g*`.
    Corvino {
        f: String,
    },
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Einstein { lambda } => write!(f, "einstein (lambda = {lambda})"),
            Self::RicciFlat => write!(f, "ricci-flat"),
            Self::Flat => write!(f, "flat"),
            Self::ConstantCurvature { k } => write!(f, "constant curvature {k}"),
            Self::NonEinstein => write!(f, "non-einstein"),
            Self::RicciComponents { entries } => write!(f, "ricci components {entries:?}"),
            Self::ScalarCurvature { expr } => write!(f, "scalar curvature {expr}"),
            Self::QuasiEinstein { phi, .. } => write!(f, "quasi-einstein (phi = {phi})"),
            Self::ConfProduct { phi, k_bar } => write!(f, "conformal product (phi = {phi}, k_bar = {k_bar})"),
            Self::Corvino { f: func } => write!(f, "corvino (f = {func})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub metric: String,
    #[serde(default)]
    pub domain: BTreeMap<String, [f64; 2]>,
    pub expectation: Expectation,
    pub citation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl CatalogEntry {
    pub fn from_json(text: &str) -> Result<Self> {
        let entry: Self = serde_json::from_str(text)?;
        if entry.name.trim().is_empty() {
            return Err(Error::invalid("catalog entry without a name"));
        }
        Ok(entry)
    }

    /// Parsed metric and domain box; unspecified coordinates get
    /// [`DEFAULT_DOMAIN`].
    pub fn build(&self) -> Result<(MetricSpec, DomainBox)> {
        MetricEnvelope {
            metric: self.metric.clone(),
            domain: self.domain.clone(),
        }
        .build(DEFAULT_DOMAIN)
    }
}

/// All built-in entries, in listing order.
pub fn entries() -> &'static [CatalogEntry] {
    static ENTRIES: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    ENTRIES.get_or_init(|| {
        SOURCES
            .iter()
            .map(|s| CatalogEntry::from_json(s).expect("built-in catalog entry is valid JSON"))
            .collect()
    })
}

pub fn find(name: &str) -> Result<&'static CatalogEntry> {
    entries()
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownCatalog(name.to_string()))
}

/// The metric of a built-in entry.
pub fn metric_of(name: &str) -> Result<MetricSpec> {
    crate::dsl::parse_metric(&find(name)?.metric)
}

/// Reads an entry from a JSON file.
pub fn load_entry(path: &Path) -> Result<CatalogEntry> {
    CatalogEntry::from_json(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogListing {
    pub name: String,
    pub citation: String,
    pub expectation: String,
}

pub fn catalog_list() -> Vec<CatalogListing> {
    entries()
        .iter()
        .map(|e| CatalogListing {
            name: e.name.clone(),
            citation: e.citation.clone(),
            expectation: e.expectation.to_string(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyOverrides {
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub parallel: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogReport {
    pub name: String,
    pub expectation: Expectation,
    pub pass: bool,
    pub lambda_hat: Option<f64>,
    /// The quantity compared against the tolerance (for non-Einstein
    /// entries, the Einstein residual that must exceed the margin).
    pub residual: f64,
    pub grid: usize,
    pub tol: f64,
    pub details: serde_json::Value,
    #[serde(skip)]
    pub wall_time_s: f64,
}

pub fn catalog_verify(name: &str, overrides: &VerifyOverrides) -> Result<CatalogReport> {
    verify_entry(find(name)?, overrides)
}

/// Verifies every built-in entry; results follow listing order.
pub fn catalog_verify_all(overrides: &VerifyOverrides) -> Result<Vec<CatalogReport>> {
    // grid loops stay serial inside, parallelism is across entries
    let inner = VerifyOverrides {
        parallel: false,
        ..*overrides
    };
    if overrides.parallel {
        entries().par_iter().map(|e| verify_entry(e, &inner)).collect()
    } else {
        entries().iter().map(|e| verify_entry(e, &inner)).collect()
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("reports serialize to JSON")
}

pub fn verify_entry(entry: &CatalogEntry, overrides: &VerifyOverrides) -> Result<CatalogReport> {
    let start = Instant::now();
    let (spec, domain) = entry.build()?;
    let count = overrides.grid.unwrap_or(DEFAULT_GRID);
    let tol = overrides.tol.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let grid = domain.halton(count);
    let par = overrides.parallel;
    let (pass, lambda_hat, residual, details) = match &entry.expectation {
        Expectation::Einstein { lambda } => {
            let rep = einstein_residual_opts(&spec, &grid, tol, par)?;
            let ok = rep.pass && (rep.lambda_hat - lambda).abs() < tol * (1.0 + lambda.abs());
            (ok, Some(rep.lambda_hat), rep.max_residual, to_value(&rep))
        }
        Expectation::RicciFlat => {
            let rep = ricci_max(&spec, &grid, par)?;
            (rep.max < tol, Some(0.0), rep.max, to_value(&rep))
        }
        Expectation::Flat => {
            let rep = riemann_max(&spec, &grid, par)?;
            (rep.max < tol, Some(0.0), rep.max, to_value(&rep))
        }
        Expectation::ConstantCurvature { k } => {
            let rep = constant_curvature_residual(&spec, &grid, *k, par)?;
            let lambda = (spec.dim() as f64 - 1.0) * k;
            (rep.max < tol, Some(lambda), rep.max, to_value(&rep))
        }
        Expectation::NonEinstein => {
            let rep = einstein_residual_opts(&spec, &grid, tol, par)?;
            let gap = rep.max_residual.max(rep.scalar_spread);
            (gap > NON_EINSTEIN_MARGIN, None, gap, to_value(&rep))
        }
        Expectation::RicciComponents { entries } => {
            let rep = ricci_components_residual(&spec, &grid, entries, par)?;
            (rep.max < tol, None, rep.max, to_value(&rep))
        }
        Expectation::ScalarCurvature { expr } => {
            let e = scalar_on(&spec, expr)?;
            let diffs = sweep(&grid, par, |p| {
                let s = curvature_at(&spec, p)?.scalar;
                let want = e.eval(p).map_err(|err| Error::from_jet(err, p))?;
                Ok((s - want).abs())
            })?;
            let max = diffs.iter().fold(0.0f64, |m, v| m.max(*v));
            (max < tol, None, max, serde_json::json!({ "max_residual": max }))
        }
        Expectation::QuasiEinstein { phi, phi_bar } => {
            let phi_e = scalar_on(&spec, phi)?;
            let rep = quasi_einstein_check(spec.dim(), &phi_e, &spec, &grid, tol)?;
            let mut phi_bar_residual = 0.0f64;
            if let Some(text) = phi_bar {
                let e = scalar_on(&spec, text)?;
                for (p, got) in grid.iter().zip(&rep.phi_bar) {
                    let want = e.eval(p).map_err(|err| Error::from_jet(err, p))?;
                    phi_bar_residual = phi_bar_residual.max((got - want).abs() / (1.0 + want.abs()));
                }
            }
            let residual = rep.max_residual.max(rep.precondition_residual);
            let ok = rep.pass && phi_bar_residual < tol;
            let mut details = to_value(&rep);
            details["phi_bar_residual"] = serde_json::json!(phi_bar_residual);
            (ok, None, residual, details)
        }
        Expectation::ConfProduct { phi, k_bar } => {
            let phi_e = scalar_on(&spec, phi)?;
            let rep = conf_product_residual(&phi_e, &spec, spec.dim(), *k_bar, &grid, tol)?;
            let lambda = spec.dim() as f64 * k_bar;
            let residual = rep.hessian_residual.max(rep.trace_residual);
            (rep.pass, Some(lambda), residual, to_value(&rep))
        }
        Expectation::Corvino { f } => {
            let f_e = scalar_on(&spec, f)?;
            let rep = corvino_residual(&f_e, &spec, &grid, tol)?;
            let residual = rep.residual.max(rep.trace_residual);
            (rep.pass, None, residual, to_value(&rep))
        }
    };
    Ok(CatalogReport {
        name: entry.name.clone(),
        expectation: entry.expectation.clone(),
        pass,
        lambda_hat,
        residual,
        grid: grid.len(),
        tol,
        details,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_parse() {
        let mut names: Vec<_> = entries().iter().map(|e| e.name.as_str()).collect();
        let total = names.len();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), total);
        for e in entries() {
            e.build().unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
    }

    #[test]
    fn listing_contains_required_fixtures() {
        let list = catalog_list();
        for name in ["mercator-n4", "calabi-ricci-flat", "ppwave-harmonic", "flatexample"] {
            assert!(list.iter().any(|l| l.name == name), "{name} missing");
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(
            catalog_verify("nope", &VerifyOverrides::default()),
            Err(Error::UnknownCatalog(_))
        ));
    }
}
