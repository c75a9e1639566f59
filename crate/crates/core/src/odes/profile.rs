//! Meridian profiles of surfaces of revolution `dt² + r(t)² dθ²` in
//! Euclidean space: distance `r` from the axis, height
//! `h(t) = ∫ √(1 − r'²)` along it, and Gaussian curvature `K`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::odes::extremal::{solve_extremal, ExtremalParams};
use crate::odes::quadrature::integrate_adaptive;
use crate::odes::TrajectoryTable;

const QUAD_TOL: f64 = 1e-13;

/// Where the profile meets the axis (`r = 0`). The point is smooth when
/// `|r'| = 1` there and a cone point otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisPoint {
    pub t: f64,
    pub k: f64,
    /// `|r'|` at the crossing.
    pub slope: f64,
    pub smooth: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceProfile {
    pub kind: String,
    /// Rows `(t, r, h, K)`.
    pub rows: Vec<[f64; 4]>,
    /// Parameter where the profile starts (`h = 0`).
    pub t0: f64,
    pub k_at_t0: f64,
    /// First parameter where `1 − r'² < 0`, if the profile was cut there.
    pub truncated_at: Option<f64>,
    pub axis_points: Vec<AxisPoint>,
}

impl SurfaceProfile {
    pub fn table(&self) -> TrajectoryTable {
        let mut t = TrajectoryTable::new(&["t", "r", "h", "K"]);
        for row in &self.rows {
            t.push(row.to_vec());
        }
        t
    }
}

/// `t₀ = 72^{1/4}`, where the profile `r = 24t⁻³` has `r' = −1`.
pub fn beltrami_t0() -> f64 {
    72f64.powf(0.25)
}

/// The surface `dt² + 576 t⁻⁶ dx²` with `K = −12t⁻²`, from `t₀` to `t_end`.
pub fn beltrami_profile(t_end: f64, samples: usize) -> Result<SurfaceProfile> {
    let t0 = beltrami_t0();
    if !(t_end > t0) {
        return Err(Error::invalid(format!(
            "the profile is real only for t ≥ t₀ = {t0}; got t_end = {t_end}"
        )));
    }
    if samples < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    // t = t₀ + s² removes the square-root zero of h' at t₀
    let dh = |s: f64| {
        let t = t0 + s * s;
        let rp = 72.0 / t.powi(4);
        2.0 * s * (1.0 - rp * rp).max(0.0).sqrt()
    };
    let s_end = (t_end - t0).sqrt();
    let mut rows = Vec::with_capacity(samples);
    let mut h = 0.0;
    let mut s_prev = 0.0;
    for i in 0..samples {
        let s = s_end * i as f64 / (samples - 1) as f64;
        h += integrate_adaptive(&dh, s_prev, s, QUAD_TOL).0;
        s_prev = s;
        let t = t0 + s * s;
        rows.push([t, 24.0 / t.powi(3), h, -12.0 / (t * t)]);
    }
    Ok(SurfaceProfile {
        kind: "beltrami".into(),
        rows,
        t0,
        k_at_t0: -12.0 / (t0 * t0),
        truncated_at: None,
        axis_points: Vec::new(),
    })
}

/// The extremal surface `dt² + a'² dx²` with `2a'' + a² = c`,
/// `a'² = ca − a³/3 + d`, started at the largest turning point of `a`.
pub fn extremal_profile(c: f64, d: f64, t_end: f64, step: f64) -> Result<SurfaceProfile> {
    if !(t_end > 0.0) {
        return Err(Error::invalid("t_end must be positive"));
    }
    let params = ExtremalParams::from_turning_point(c, d)?;
    let sol = solve_extremal(&params, [0.0, t_end], step)?;
    let traj = sol.curvature_fn();
    let slope_sq = |t: f64| {
        let y = traj.state_at(t).expect("inside trajectory");
        y[2] * y[2]
    };
    let mut rows = Vec::with_capacity(sol.t.len());
    let mut h = 0.0;
    let mut truncated_at = None;
    for (i, (t, y)) in sol.t.iter().zip(&sol.states).enumerate() {
        if 1.0 - y[2] * y[2] < -1e-12 {
            truncated_at = Some(*t);
            break;
        }
        if i > 0 {
            let dh = |s: f64| (1.0 - slope_sq(s)).max(0.0).sqrt();
            h += integrate_adaptive(&dh, sol.t[i - 1], *t, QUAD_TOL).0;
        }
        rows.push([*t, y[1].abs(), h, y[0]]);
    }
    let end = truncated_at.unwrap_or(t_end);
    let axis_points = std::iter::once(0.0)
        .chain(sol.dk_zero_crossings.iter().copied().filter(|&t| t > 0.0 && t <= end))
        .map(|mut t| {
            // Newton on K' sharpens the interpolated crossing
            let [lo, hi] = traj.range();
            for _ in 0..3 {
                let y = traj.state_at(t).expect("inside trajectory");
                if y[2] != 0.0 {
                    t = (t - y[1] / y[2]).clamp(lo, hi);
                }
            }
            let y = traj.state_at(t).expect("inside trajectory");
            let slope = y[2].abs();
            AxisPoint {
                t,
                k: y[0],
                slope,
                smooth: (slope - 1.0).abs() < 1e-6,
            }
        })
        .collect();
    Ok(SurfaceProfile {
        kind: "figure1".into(),
        rows,
        t0: 0.0,
        k_at_t0: params.k0,
        truncated_at,
        axis_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beltrami_start() {
        let p = beltrami_profile(6.0, 50).unwrap();
        assert!((p.t0 - 2.912_950_6).abs() < 1e-6);
        assert!((p.k_at_t0 + 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(p.rows[0][2], 0.0);
        assert!(p.rows.windows(2).all(|w| w[1][2] > w[0][2]));
        assert!(beltrami_profile(2.0, 10).is_err());
    }

    #[test]
    fn extremal_axis_points() {
        let p = extremal_profile(2.0, -4.0 / 3.0, 8.0, 1e-3).unwrap();
        assert!(p.truncated_at.is_none());
        let first = p.axis_points[0];
        assert!((first.k - 2.0).abs() < 1e-12 && first.smooth);
        let cone = p.axis_points[1];
        assert!((cone.k - (3f64.sqrt() - 1.0)).abs() < 1e-8);
        assert!(!cone.smooth);
        assert!((cone.slope - (3f64.sqrt() - 1.0)).abs() < 1e-8);
    }
}
