//! The JSON document every subcommand prints on standard output.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Serialize)]
pub struct RunReport {
    /// Arguments as given, after the program name.
    pub command: String,
    pub inputs: Value,
    pub pass: bool,
    pub summary: Value,
    /// Only present with `--timing`, so reports stay byte-stable otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_s: Option<f64>,
    pub version: &'static str,
}

impl RunReport {
    pub fn new(inputs: Value, pass: bool, summary: Value) -> Self {
        Self {
            command: std::env::args().skip(1).collect::<Vec<_>>().join(" "),
            inputs,
            pass,
            summary,
            timing_s: None,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Outcome of a subcommand: the report plus a one-paragraph human summary.
pub struct Outcome {
    pub report: RunReport,
    pub message: String,
}
