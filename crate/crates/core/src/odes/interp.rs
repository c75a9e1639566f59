//! Smooth evaluation of a stored trajectory at arbitrary parameters.
//!
//! Between nodes the solution is recovered by one RK4 step from the nearest
//! node, so the interpolant has the integrator's accuracy and its derivatives
//! come straight from the differential equation.

use std::sync::Arc;

use crate::dsl::UnivariateFn;
use crate::jets::JetError;
use crate::odes::rk4::rk4_step;

pub type Rhs<const N: usize> = Arc<dyn Fn(f64, &[f64; N]) -> [f64; N] + Send + Sync>;
pub type Projection<const N: usize> = Arc<dyn Fn(&[f64; N]) -> (f64, f64, f64) + Send + Sync>;

/// A scalar function of the trajectory state, as a [`UnivariateFn`].
pub struct TrajectoryFn<const N: usize> {
    name: String,
    t: Vec<f64>,
    y: Vec<[f64; N]>,
    rhs: Rhs<N>,
    project: Projection<N>,
}

impl<const N: usize> TrajectoryFn<N> {
    /// `project` maps a state to the value and first two derivatives of the
    /// exported quantity.
    pub fn new(name: &str, t: &[f64], y: &[[f64; N]], rhs: Rhs<N>, project: Projection<N>) -> Self {
        let mut pairs: Vec<(f64, [f64; N])> = t.iter().copied().zip(y.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            name: name.to_string(),
            t: pairs.iter().map(|p| p.0).collect(),
            y: pairs.iter().map(|p| p.1).collect(),
            rhs,
            project,
        }
    }

    pub fn range(&self) -> [f64; 2] {
        [self.t[0], *self.t.last().expect("non-empty trajectory")]
    }

    pub fn state_at(&self, x: f64) -> Option<[f64; N]> {
        let [lo, hi] = self.range();
        if !(lo..=hi).contains(&x) {
            return None;
        }
        let i = self.t.partition_point(|&v| v < x);
        let nearest = if i == 0 {
            0
        } else if i == self.t.len() || (x - self.t[i - 1]) <= (self.t[i] - x) {
            i - 1
        } else {
            i
        };
        let h = x - self.t[nearest];
        if h == 0.0 {
            return Some(self.y[nearest]);
        }
        Some(rk4_step(&*self.rhs, self.t[nearest], &self.y[nearest], h))
    }
}

impl<const N: usize> UnivariateFn for TrajectoryFn<N> {
    fn name(&self) -> &str {
        &self.name
    }

    fn taylor(&self, x: f64) -> Result<(f64, f64, f64), JetError> {
        let y = self.state_at(x).ok_or(JetError::Domain {
            function: "trajectory",
            value: x,
        })?;
        Ok((self.project)(&y))
    }
}
