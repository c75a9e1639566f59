//! The metric description language: scalar expressions over chart
//! coordinates and metric constructors built from them.

pub mod expr;
pub mod metric;
pub mod parser;

pub use expr::{BinOp, Expr, Func, UnivariateFn};
pub use metric::{evaluate_metric, MetricJets, MetricSpec, Signature};
pub use parser::{parse_expr, parse_metric};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DomainBox;

/// Metric text together with an optional domain box, as accepted on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricEnvelope {
    pub metric: String,
    #[serde(default)]
    pub domain: BTreeMap<String, [f64; 2]>,
}

impl MetricEnvelope {
    /// Accepts either a JSON envelope or bare metric text.
    pub fn from_text(text: &str) -> Result<Self> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('{') {
            Ok(serde_json::from_str(trimmed)?)
        } else {
            Ok(Self {
                metric: text.trim().to_string(),
                domain: BTreeMap::new(),
            })
        }
    }

    /// Parses the metric and builds a domain box, filling coordinates not
    /// listed with `default`.
    pub fn build(&self, default: [f64; 2]) -> Result<(MetricSpec, DomainBox)> {
        let spec = parse_metric(&self.metric)?;
        let coords = spec.coordinates();
        for name in self.domain.keys() {
            if !coords.contains(name) {
                return Err(Error::UnknownSymbol {
                    name: name.clone(),
                    declared: coords.join(", "),
                });
            }
        }
        let bounds = coords
            .iter()
            .map(|c| self.domain.get(c).copied().unwrap_or(default))
            .collect();
        let domain = DomainBox::new(coords, bounds)?;
        Ok((spec, domain))
    }
}
