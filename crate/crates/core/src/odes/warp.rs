//! Iterated warped products `±u'(x)² dt² + dx² + u(x)² g_k`.
//!
//! Here `g_k` is an `(n−1)`-dimensional Einstein metric with
//! `Ric = k(n−2) g_k`. The product is Einstein with constant `2d` when
//!
//! ```text
//! u u'' + (n−2)/2 u'² + d u² − k(n−2)/2 = 0,
//! ```
//!
//! which integrates to `u^{n−2}(u'² + k̄u² − k) = c` with `k̄ = 2d/n`, and
//! equivalently `((u^{n/2})')² + (dn/2)(u^{n/2})² − k(n²/4)u^{n−2} = e` with
//! `e = (n²/4) c`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dsl::{BinOp, Expr, MetricSpec};
use crate::error::{Error, Result};
use crate::odes::interp::TrajectoryFn;
use crate::odes::rk4::integrate;
use crate::odes::{drift, sign_changes, TrajectoryTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IteratedWarpProblem {
    pub n: usize,
    pub k: f64,
    pub d: f64,
    pub x0: f64,
    pub u0: f64,
    pub du0: f64,
}

impl IteratedWarpProblem {
    pub fn new(n: usize, k: f64, d: f64, x0: f64, u0: f64, du0: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!("n must be at least 3, got {n}")));
        }
        if !(u0 > 0.0) {
            return Err(Error::invalid(format!("u₀ must be positive, got {u0}")));
        }
        Ok(Self { n, k, d, x0, u0, du0 })
    }

    pub fn k_bar(&self) -> f64 {
        2.0 * self.d / self.n as f64
    }

    /// Einstein constant of the exported metric.
    pub fn lambda(&self) -> f64 {
        2.0 * self.d
    }

    /// `u''` from the second-order equation.
    pub fn second(&self, u: f64, du: f64) -> f64 {
        let m = self.n as f64 - 2.0;
        (0.5 * self.k * m - 0.5 * m * du * du - self.d * u * u) / u
    }

    /// `u'''` from differentiating the second-order equation.
    pub fn third(&self, u: f64, du: f64) -> f64 {
        let ddu = self.second(u, du);
        -((self.n as f64 - 1.0) * du * ddu + 2.0 * self.d * u * du) / u
    }

    /// `c = u^{n−2}(u'² + k̄u² − k)`
    pub fn c_of(&self, u: f64, du: f64) -> f64 {
        u.powi(self.n as i32 - 2) * (du * du + self.k_bar() * u * u - self.k)
    }

    /// `e = ((u^{n/2})')² + (dn/2)(u^{n/2})² − k(n²/4)u^{n−2}`
    pub fn e_of(&self, u: f64, du: f64) -> f64 {
        let n = self.n as f64;
        let w = u.powf(0.5 * n);
        let dw = 0.5 * n * u.powf(0.5 * n - 1.0) * du;
        dw * dw + 0.5 * self.d * n * w * w - self.k * 0.25 * n * n * u.powi(self.n as i32 - 2)
    }

    /// Residual of `u²u''' + (n−3)uu'u'' − (n−2)u'³ + k(n−2)u' = 0`.
    pub fn third_order_residual(&self, u: f64, du: f64, ddu: f64, dddu: f64) -> f64 {
        let n = self.n as f64;
        u * u * dddu + (n - 3.0) * u * du * ddu - (n - 2.0) * du.powi(3) + self.k * (n - 2.0) * du
    }

    fn rhs(&self) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + Send + Sync + 'static {
        let p = *self;
        move |_x: f64, y: &[f64; 2]| [y[1], p.second(y[0], y[1])]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WarpSolution {
    pub problem: IteratedWarpProblem,
    pub x: Vec<f64>,
    /// `(u, u')`
    pub states: Vec<[f64; 2]>,
    pub c: f64,
    pub e: f64,
    pub c_drift: f64,
    pub e_drift: f64,
    /// Parameter at which `u` reached zero and integration stopped.
    pub truncated_at: Option<f64>,
    /// Parameters where `u'` changes sign; the exported chart degenerates
    /// there.
    pub du_zero_crossings: Vec<f64>,
}

/// Integrates the second-order form over `x_span` (starting at `p.x0`, which
/// must be an endpoint of the span).
pub fn solve_iterated_warp(p: &IteratedWarpProblem, x_span: [f64; 2], step: f64) -> Result<WarpSolution> {
    if !(step > 0.0) {
        return Err(Error::invalid("step must be positive"));
    }
    let (from, to) = if x_span[0] == p.x0 {
        (x_span[0], x_span[1])
    } else if x_span[1] == p.x0 {
        (x_span[1], x_span[0])
    } else {
        return Err(Error::invalid("x₀ must be an endpoint of the span"));
    };
    let rhs = p.rhs();
    let path = integrate(&rhs, from, to, step, [p.u0, p.du0], |y| y[0] <= 0.0);
    let c = p.c_of(p.u0, p.du0);
    let e = p.e_of(p.u0, p.du0);
    let c_drift = drift(path.y.iter().map(|y| p.c_of(y[0], y[1])));
    let e_drift = drift(path.y.iter().map(|y| p.e_of(y[0], y[1])));
    let du_zero_crossings = sign_changes(&path.t, |i| path.y[i][1]);
    Ok(WarpSolution {
        problem: *p,
        c,
        e,
        c_drift,
        e_drift,
        truncated_at: path.stopped_at,
        du_zero_crossings,
        x: path.t,
        states: path.y,
    })
}

impl WarpSolution {
    pub fn table(&self) -> TrajectoryTable {
        let p = &self.problem;
        let mut t = TrajectoryTable::new(&["x", "u", "du", "ddu", "c", "e"]);
        for (x, y) in self.x.iter().zip(&self.states) {
            t.push(vec![
                *x,
                y[0],
                y[1],
                p.second(y[0], y[1]),
                p.c_of(y[0], y[1]),
                p.e_of(y[0], y[1]),
            ]);
        }
        t
    }

    /// `u` with derivatives from the equation.
    pub fn u_fn(&self) -> Arc<TrajectoryFn<2>> {
        let p = self.problem;
        Arc::new(TrajectoryFn::new(
            "u",
            &self.x,
            &self.states,
            Arc::new(p.rhs()),
            Arc::new(move |y: &[f64; 2]| (y[0], y[1], p.second(y[0], y[1]))),
        ))
    }

    /// `u'` with derivatives from the equation.
    pub fn du_fn(&self) -> Arc<TrajectoryFn<2>> {
        let p = self.problem;
        Arc::new(TrajectoryFn::new(
            "du",
            &self.x,
            &self.states,
            Arc::new(p.rhs()),
            Arc::new(move |y: &[f64; 2]| (y[1], p.second(y[0], y[1]), p.third(y[0], y[1]))),
        ))
    }

    /// Largest residual of the third-order equation along the trajectory.
    pub fn third_order_residual(&self) -> f64 {
        let p = &self.problem;
        self.states.iter().fold(0.0f64, |m, y| {
            let (u, du) = (y[0], y[1]);
            m.max(p.third_order_residual(u, du, p.second(u, du), p.third(u, du)).abs())
        })
    }

    /// `sign·u'² dt² + dx² + u² g_k` in coordinates `(t, x, fiber...)`.
    pub fn export_metric(&self, sign: f64) -> MetricSpec {
        let chart = vec!["t".to_string(), "x".to_string()];
        let mut x = Expr::var("x");
        x.resolve(&chart).expect("x in chart");
        let du = Expr::custom(self.du_fn(), x.clone());
        let u = Expr::custom(self.u_fn(), x);
        MetricSpec::Warped {
            base: Box::new(MetricSpec::Diag {
                coords: chart,
                signs: vec![sign.signum(), 1.0],
                coeffs: vec![Expr::binary(BinOp::Pow, du, Expr::Num(2.0)), Expr::Num(1.0)],
            }),
            warp: u,
            fiber: Box::new(einstein_fiber(self.problem.n - 1, self.problem.k)),
        }
    }
}

/// Space form of dimension `m` with sectional curvature `k`.
pub fn einstein_fiber(m: usize, k: f64) -> MetricSpec {
    if k == 0.0 {
        return MetricSpec::Flat {
            n: m,
            signs: None,
            names: None,
        };
    }
    let model = if k > 0.0 {
        MetricSpec::Sphere {
            n: m,
            sign: 1.0,
            names: None,
        }
    } else {
        MetricSpec::Hyperbolic {
            n: m,
            sign: 1.0,
            names: None,
        }
    };
    MetricSpec::Conformal {
        factor: Expr::Num(1.0 / k.abs().sqrt()),
        inner: Box::new(model),
    }
}
