//! Solvers for the ordinary differential equations behind the
//! constructions, each with first-integral monitoring.
//!
//! Every problem type keeps its own integration constants:
//!
//! | problem | equation | constants |
//! |---|---|---|
//! | [`BrinkmannProblem`] | `φ''' + εkφ' = 0` | `(φ'')² + εk(φ')² = εk*` |
//! | [`FtProblem`] | `f'' = εk*f` | `k*f² − ε(f')² = k̄` |
//! | [`ExtremalParams`] | `K''' + KK' = 0` | `2K'' + K² = c`, `K'² = cK − K³/3 + d` |
//! | [`IteratedWarpProblem`] | `uu'' + (n−2)/2 u'² + du² = k(n−2)/2` | `c = u^{n−2}(u'² + k̄u² − k)`, `e = (n²/4) c` |

pub mod brinkmann;
pub mod extremal;
pub mod ft;
pub mod interp;
pub mod profile;
pub mod quadrature;
pub mod residuals;
pub mod rk4;
pub mod warp;

pub use brinkmann::{solve_brinkmann, BrinkmannFamily, BrinkmannProblem, BrinkmannSolution};
pub use extremal::{solve_extremal, ExtremalParams, ExtremalSolution};
pub use ft::{solve_ft, FtFamily, FtProblem, FtSolution};
pub use profile::{beltrami_profile, beltrami_t0, extremal_profile, AxisPoint, SurfaceProfile};
pub use quadrature::{quadrature_x_of_u, QuadratureResult};
pub use residuals::{conf_product_residual, corvino_residual, ConfProductReport, CorvinoReport};
pub use warp::{solve_iterated_warp, IteratedWarpProblem, WarpSolution};

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// Column-oriented numeric table written as CSV.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TrajectoryTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

/// Largest deviation of a sampled quantity from its initial value.
pub(crate) fn drift(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = values.into_iter();
    let Some(first) = it.next() else { return 0.0 };
    it.fold(0.0f64, |m, v| m.max((v - first).abs()))
}

/// Parameters at which a sampled quantity changes sign (linear interpolation).
pub(crate) fn sign_changes(t: &[f64], v: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..t.len() {
        let (a, b) = (v(i - 1), v(i));
        if a == 0.0 && i == 1 {
            out.push(t[0]);
        } else if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            out.push(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b));
        }
    }
    out
}
