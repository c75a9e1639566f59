//! `K''' + KK' = 0`, the curvature equation of extremal surfaces
//! `dt² + K'(t)² dx²`, with first integrals `2K'' + K² = c` and
//! `K'² = cK − K³/3 + d`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dsl::{BinOp, Expr, MetricSpec};
use crate::error::{Error, Result};
use crate::odes::interp::TrajectoryFn;
use crate::odes::rk4::integrate;
use crate::odes::{drift, sign_changes, TrajectoryTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalParams {
    pub c: f64,
    pub d: f64,
    pub k0: f64,
    pub dk0: f64,
}

impl ExtremalParams {
    /// Validates `K₀'² = cK₀ − K₀³/3 + d`.
    pub fn new(c: f64, d: f64, k0: f64, dk0: f64) -> Result<Self> {
        let rhs = cubic(c, d, k0);
        let scale = 1.0 + (c * k0).abs() + k0.abs().powi(3) / 3.0 + d.abs();
        if (dk0 * dk0 - rhs).abs() > 1e-12 * scale {
            return Err(Error::invalid(format!(
                "initial data inconsistent with (c, d): K'² = {}, cK − K³/3 + d = {rhs}",
                dk0 * dk0
            )));
        }
        Ok(Self { c, d, k0, dk0 })
    }

    /// Starts at the largest turning point (`K' = 0`), i.e. the largest real
    /// root of `cK − K³/3 + d`.
    pub fn from_turning_point(c: f64, d: f64) -> Result<Self> {
        let k0 = largest_turning_point(c, d);
        Self::new(c, d, k0, 0.0)
    }

    pub fn dd_k0(&self) -> f64 {
        0.5 * (self.c - self.k0 * self.k0)
    }

    /// `(2K'' + K², K'² − cK + K³/3)`, constant along solutions.
    pub fn integrals(&self, y: &[f64; 3]) -> (f64, f64) {
        let c = 2.0 * y[2] + y[0] * y[0];
        let d = y[1] * y[1] - self.c * y[0] + y[0].powi(3) / 3.0;
        (c, d)
    }
}

fn cubic(c: f64, d: f64, k: f64) -> f64 {
    c * k - k * k * k / 3.0 + d
}

/// Largest real root of `cK − K³/3 + d`, which is decreasing for large `K`.
pub fn largest_turning_point(c: f64, d: f64) -> f64 {
    let mut hi = 1.0f64;
    while cubic(c, d, hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = -1.0f64;
    while cubic(c, d, lo) <= 0.0 && lo > -1e12 {
        lo *= 2.0;
    }
    // the largest root lies in [lo, hi] where the cubic is positive at lo;
    // scan down from hi to the last sign change
    let n = 4096;
    let mut b = hi;
    for i in 1..=n {
        let a = hi - (hi - lo) * i as f64 / n as f64;
        if cubic(c, d, a) >= 0.0 {
            let (mut l, mut r) = (a, b);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                if cubic(c, d, m) >= 0.0 {
                    l = m;
                } else {
                    r = m;
                }
            }
            return if cubic(c, d, r).abs() < cubic(c, d, l).abs() {
                r
            } else {
                l
            };
        }
        b = a;
    }
    hi
}

fn rhs(_t: f64, y: &[f64; 3]) -> [f64; 3] {
    [y[1], y[2], -y[0] * y[1]]
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalSolution {
    pub params: ExtremalParams,
    pub t: Vec<f64>,
    /// `(K, K', K'')`
    pub states: Vec<[f64; 3]>,
    pub c_drift: f64,
    pub d_drift: f64,
    pub k_min: f64,
    pub k_max: f64,
    /// Parameters where `K'` changes sign; the metric `dt² + K'²dx²`
    /// degenerates there.
    pub dk_zero_crossings: Vec<f64>,
}

pub fn solve_extremal(p: &ExtremalParams, t_span: [f64; 2], step: f64) -> Result<ExtremalSolution> {
    if !(step > 0.0) {
        return Err(Error::invalid("step must be positive"));
    }
    let y0 = [p.k0, p.dk0, p.dd_k0()];
    let path = integrate(&rhs, t_span[0], t_span[1], step, y0, |_| false);
    let (c0, d0) = p.integrals(&y0);
    let c_drift = drift(std::iter::once(c0).chain(path.y.iter().map(|y| p.integrals(y).0)));
    let d_drift = drift(std::iter::once(d0).chain(path.y.iter().map(|y| p.integrals(y).1)));
    let k_min = path.y.iter().map(|y| y[0]).fold(f64::INFINITY, f64::min);
    let k_max = path.y.iter().map(|y| y[0]).fold(f64::NEG_INFINITY, f64::max);
    let dk_zero_crossings = sign_changes(&path.t, |i| path.y[i][1]);
    Ok(ExtremalSolution {
        params: *p,
        t: path.t,
        states: path.y,
        c_drift,
        d_drift,
        k_min,
        k_max,
        dk_zero_crossings,
    })
}

impl ExtremalSolution {
    pub fn table(&self) -> TrajectoryTable {
        let mut t = TrajectoryTable::new(&["t", "K", "dK", "ddK", "c", "d"]);
        for (ti, y) in self.t.iter().zip(&self.states) {
            let (c, d) = self.params.integrals(y);
            t.push(vec![*ti, y[0], y[1], y[2], c, d]);
        }
        t
    }

    /// `K` as a function of `t`, with derivatives from the equation.
    pub fn curvature_fn(&self) -> Arc<TrajectoryFn<3>> {
        Arc::new(TrajectoryFn::new(
            "K",
            &self.t,
            &self.states,
            Arc::new(rhs),
            Arc::new(|y: &[f64; 3]| (y[0], y[1], y[2])),
        ))
    }

    /// `K'` as a function of `t`.
    pub fn derivative_fn(&self) -> Arc<TrajectoryFn<3>> {
        Arc::new(TrajectoryFn::new(
            "dK",
            &self.t,
            &self.states,
            Arc::new(rhs),
            Arc::new(|y: &[f64; 3]| (y[1], y[2], -y[0] * y[1])),
        ))
    }

    /// The surface `dt² + K'(t)² dx²` in coordinates `(t, x)`.
    pub fn export_metric(&self) -> MetricSpec {
        let mut t = Expr::var("t");
        t.resolve(&["t".to_string(), "x".to_string()]).expect("t in chart");
        let dk = Expr::custom(self.derivative_fn(), t);
        MetricSpec::Diag {
            coords: vec!["t".into(), "x".into()],
            signs: vec![1.0, 1.0],
            coeffs: vec![Expr::Num(1.0), Expr::binary(BinOp::Pow, dk, Expr::Num(2.0))],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn largest_turning_point_start() {
        let p = ExtremalParams::from_turning_point(2.0, -4.0 / 3.0).unwrap();
        assert!((p.k0 - 2.0).abs() < 1e-12);
        assert!((p.dd_k0() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_solution() {
        let k0: f64 = 1.5;
        let c = k0 * k0;
        let d = -c * k0 + k0.powi(3) / 3.0;
        let p = ExtremalParams::new(c, d, k0, 0.0).unwrap();
        let s = solve_extremal(&p, [0.0, 5.0], 1e-2).unwrap();
        assert!(s.states.iter().all(|y| (y[0] - k0).abs() < 1e-14));
        assert!(ExtremalParams::new(c, d + 1.0, k0, 0.0).is_err());
    }
}
