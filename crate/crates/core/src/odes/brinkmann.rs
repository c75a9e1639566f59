//! `φ''' + εkφ' = 0` with first integral `(φ'')² + εk(φ')² = εk*`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odes::rk4::integrate;
use crate::odes::{drift, TrajectoryTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BrinkmannProblem {
    pub eps: f64,
    pub k: f64,
    pub phi0: f64,
    pub dphi0: f64,
    /// Defaults to `−εkφ₀`, which selects the family through `φ₀` without
    /// an additive constant (`cos`, `cosh`, linear).
    pub ddphi0: Option<f64>,
}

impl BrinkmannProblem {
    pub fn initial(&self) -> [f64; 3] {
        [
            self.phi0,
            self.dphi0,
            self.ddphi0.unwrap_or(-self.eps * self.k * self.phi0),
        ]
    }

    /// `(φ'')² + εk(φ')²`
    pub fn integral(&self, y: &[f64; 3]) -> f64 {
        y[2] * y[2] + self.eps * self.k * y[1] * y[1]
    }
}

/// Closed-form family selected by the sign of `εk`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrinkmannFamily {
    /// `εk > 0`: `A + B cos(ωt) + C sin(ωt)`
    Trig,
    /// `εk < 0`: `A + B cosh(ωt) + C sinh(ωt)`
    Hyperbolic,
    /// `k = 0` and `φ₀'' = 0`
    Linear,
    /// `k = 0` otherwise
    Quadratic,
}

#[derive(Debug, Clone, Serialize)]
pub struct BrinkmannSolution {
    pub t: Vec<f64>,
    /// `(φ, φ', φ'')`
    pub states: Vec<[f64; 3]>,
    pub k_star: f64,
    pub drift: f64,
    pub family: BrinkmannFamily,
}

impl BrinkmannSolution {
    pub fn table(&self, p: &BrinkmannProblem) -> TrajectoryTable {
        let mut t = TrajectoryTable::new(&["t", "phi", "dphi", "ddphi", "eps_k_star"]);
        for (ti, y) in self.t.iter().zip(&self.states) {
            t.push(vec![*ti, y[0], y[1], y[2], p.integral(y)]);
        }
        t
    }
}

pub fn solve_brinkmann(p: &BrinkmannProblem, t_span: [f64; 2], step: f64) -> Result<BrinkmannSolution> {
    if !(step > 0.0) {
        return Err(Error::invalid("step must be positive"));
    }
    if p.eps.abs() != 1.0 {
        return Err(Error::invalid("ε must be +1 or -1"));
    }
    let ek = p.eps * p.k;
    let rhs = move |_t: f64, y: &[f64; 3]| [y[1], y[2], -ek * y[1]];
    let y0 = p.initial();
    let path = integrate(&rhs, t_span[0], t_span[1], step, y0, |_| false);
    let family = if ek > 0.0 {
        BrinkmannFamily::Trig
    } else if ek < 0.0 {
        BrinkmannFamily::Hyperbolic
    } else if y0[2] == 0.0 {
        BrinkmannFamily::Linear
    } else {
        BrinkmannFamily::Quadratic
    };
    Ok(BrinkmannSolution {
        k_star: p.eps * p.integral(&y0),
        drift: drift(path.y.iter().map(|y| p.integral(y))),
        t: path.t,
        states: path.y,
        family,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cosine_family() {
        let p = BrinkmannProblem {
            eps: 1.0,
            k: 1.0,
            phi0: 1.0,
            dphi0: 0.0,
            ddphi0: None,
        };
        let s = solve_brinkmann(&p, [0.0, 2.0 * PI], 1e-3).unwrap();
        assert_eq!(s.family, BrinkmannFamily::Trig);
        assert!(s.drift < 1e-10);
        assert!((s.k_star - 1.0).abs() < 1e-15);
        for (t, y) in s.t.iter().zip(&s.states) {
            assert!((y[0] - t.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn cosh_and_linear_families() {
        let p = BrinkmannProblem {
            eps: 1.0,
            k: -1.0,
            phi0: 1.0,
            dphi0: 0.0,
            ddphi0: None,
        };
        let s = solve_brinkmann(&p, [0.0, 2.0], 1e-3).unwrap();
        assert_eq!(s.family, BrinkmannFamily::Hyperbolic);
        assert!((s.states.last().unwrap()[0] - 2f64.cosh()).abs() < 1e-10);

        let p = BrinkmannProblem {
            eps: 1.0,
            k: 0.0,
            phi0: 0.0,
            dphi0: 1.0,
            ddphi0: Some(0.0),
        };
        let s = solve_brinkmann(&p, [0.0, 3.0], 1e-3).unwrap();
        assert_eq!(s.family, BrinkmannFamily::Linear);
        assert_eq!(s.k_star, 0.0);
        assert!((s.states.last().unwrap()[0] - 3.0).abs() < 1e-12);
    }
}
