//! `f'' = εk*f` with first integral `k*f² − ε(f')² = k̄`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odes::rk4::integrate;
use crate::odes::{drift, TrajectoryTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtProblem {
    pub eps: f64,
    pub k_star: f64,
    pub k_bar: f64,
    pub f0: f64,
    pub df0: f64,
}

impl FtProblem {
    /// Problem with `k̄` computed from the initial data.
    pub fn from_initial(eps: f64, k_star: f64, f0: f64, df0: f64) -> Self {
        Self {
            eps,
            k_star,
            k_bar: k_star * f0 * f0 - eps * df0 * df0,
            f0,
            df0,
        }
    }

    pub fn integral(&self, f: f64, df: f64) -> f64 {
        self.k_star * f * f - self.eps * df * df
    }

    /// Exact solution `f(t)` of the linear equation.
    pub fn closed_form(&self, t: f64) -> f64 {
        let w2 = self.eps * self.k_star;
        if w2 > 0.0 {
            let w = w2.sqrt();
            self.f0 * (w * t).cosh() + self.df0 / w * (w * t).sinh()
        } else if w2 < 0.0 {
            let w = (-w2).sqrt();
            self.f0 * (w * t).cos() + self.df0 / w * (w * t).sin()
        } else {
            self.f0 + self.df0 * t
        }
    }

    /// Matches the initial data against the tabulated solution families.
    pub fn family(&self) -> FtFamily {
        let w2 = self.eps * self.k_star;
        let omega = w2.abs().sqrt();
        match (self.f0, self.df0) {
            (f, d) if f == 1.0 && d == 0.0 => {
                if w2 > 0.0 {
                    FtFamily::Cosh { omega }
                } else if w2 < 0.0 {
                    FtFamily::Cos { omega }
                } else {
                    FtFamily::Const
                }
            }
            (f, d) if f == 1.0 && d == 1.0 => {
                if w2 > 0.0 && (omega - 1.0).abs() < 1e-15 {
                    FtFamily::Exp
                } else if w2 > 0.0 {
                    FtFamily::MixedExp { omega }
                } else if w2 == 0.0 {
                    FtFamily::Linear
                } else {
                    FtFamily::Numeric
                }
            }
            (f, d) if f == 0.0 && d == 1.0 => {
                if w2 > 0.0 {
                    FtFamily::Sinh { omega }
                } else if w2 < 0.0 {
                    FtFamily::Sin { omega }
                } else {
                    FtFamily::T
                }
            }
            _ => FtFamily::Numeric,
        }
    }
}

/// Tabulated families (`ω = √|εk*|`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FtFamily {
    /// `cosh(ωt)`
    Cosh { omega: f64 },
    /// `cos(ωt)`
    Cos { omega: f64 },
    /// `1`
    Const,
    /// `e^t`
    Exp,
    /// `t + 1`
    Linear,
    /// `((ω+1)e^{ωt} + (ω−1)e^{−ωt}) / (2ω)`
    MixedExp { omega: f64 },
    /// `sinh(ωt)/ω`
    Sinh { omega: f64 },
    /// `sin(ωt)/ω`
    Sin { omega: f64 },
    /// `t`
    T,
    /// No tabulated family matches.
    Numeric,
}

#[derive(Debug, Clone, Serialize)]
pub struct FtSolution {
    pub t: Vec<f64>,
    /// `(f, f')`
    pub states: Vec<[f64; 2]>,
    pub family: FtFamily,
    pub k_bar: f64,
    pub drift: f64,
    /// Largest deviation from the exact solution.
    pub closed_form_error: f64,
}

impl FtSolution {
    pub fn table(&self, p: &FtProblem) -> TrajectoryTable {
        let mut t = TrajectoryTable::new(&["t", "f", "df", "k_bar"]);
        for (ti, y) in self.t.iter().zip(&self.states) {
            t.push(vec![*ti, y[0], y[1], p.integral(y[0], y[1])]);
        }
        t
    }
}

pub fn solve_ft(p: &FtProblem, t_span: [f64; 2], step: f64) -> Result<FtSolution> {
    if !(step > 0.0) {
        return Err(Error::invalid("step must be positive"));
    }
    if p.eps.abs() != 1.0 {
        return Err(Error::invalid("ε must be +1 or -1"));
    }
    let k_bar = p.integral(p.f0, p.df0);
    if (k_bar - p.k_bar).abs() > 1e-12 * (1.0 + k_bar.abs()) {
        return Err(Error::invalid(format!(
            "initial data give k̄ = {k_bar}, inconsistent with declared k̄ = {}",
            p.k_bar
        )));
    }
    let w2 = p.eps * p.k_star;
    let rhs = move |_t: f64, y: &[f64; 2]| [y[1], w2 * y[0]];
    let path = integrate(&rhs, t_span[0], t_span[1], step, [p.f0, p.df0], |_| false);
    let closed_form_error = path
        .t
        .iter()
        .zip(&path.y)
        .fold(0.0f64, |m, (t, y)| m.max((y[0] - p.closed_form(*t)).abs()));
    Ok(FtSolution {
        drift: drift(path.y.iter().map(|y| p.integral(y[0], y[1]))),
        family: p.family(),
        k_bar,
        closed_form_error,
        t: path.t,
        states: path.y,
    })
}
