//! Second-order truncated Taylor arithmetic.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of a scalar quantity
//! with respect to the `d` chart coordinates. Arithmetic and elementary
//! functions propagate all three exactly (up to rounding), which is all the
//! curvature engine needs: Christoffel symbols use first derivatives of the
//! metric and the Riemann tensor second derivatives.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

/// Failure while lifting or transforming a jet.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("{function} is not defined (or not twice differentiable) at {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("{function} produced a non-finite jet at {value}")]
    NonFinite { function: &'static str, value: f64 },
}

/// Value, gradient and dense symmetric Hessian of a scalar.
#[derive(Clone, PartialEq)]
pub struct Jet2 {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet2")
            .field("value", &self.value)
            .field("gradient", &self.grad)
            .field("hessian", &self.hess)
            .finish()
    }
}

impl Jet2 {
    pub fn constant(value: f64, dim: usize) -> Self {
        Self {
            value,
            grad: vec![0.0; dim],
            hess: vec![0.0; dim * dim],
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(0.0, dim)
    }

    /// Seed jet of the `index`-th coordinate at `point`.
    pub fn coordinate(index: usize, point: &[f64]) -> Result<Self, JetError> {
        let dim = point.len();
        if index >= dim {
            return Err(JetError::IndexOutOfRange { index, dim });
        }
        let mut jet = Self::constant(point[index], dim);
        jet.grad[index] = 1.0;
        Ok(jet)
    }

    /// Seed jets for every coordinate of `point`.
    pub fn coordinates(point: &[f64]) -> Vec<Self> {
        (0..point.len())
            .map(|i| Self::coordinate(i, point).expect("index in range"))
            .collect()
    }

    /// Builds a jet from explicit parts. The Hessian is symmetrized.
    pub fn from_parts(value: f64, gradient: Vec<f64>, hessian: Vec<f64>) -> Self {
        let dim = gradient.len();
        assert_eq!(hessian.len(), dim * dim, "hessian must be dim x dim");
        let mut jet = Self {
            value,
            grad: gradient,
            hess: hessian,
        };
        jet.symmetrize();
        jet
    }

    fn symmetrize(&mut self) {
        let d = self.dim();
        for i in 0..d {
            for j in (i + 1)..d {
                let avg = 0.5 * (self.hess[i * d + j] + self.hess[j * d + i]);
                self.hess[i * d + j] = avg;
                self.hess[j * d + i] = avg;
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    #[inline]
    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    /// Row-major `d x d` Hessian.
    pub fn hessian_matrix(&self) -> &[f64] {
        &self.hess
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.grad.iter().all(|v| v.is_finite()) && self.hess.iter().all(|v| v.is_finite())
    }

    /// True when the jet has no dependence on any coordinate.
    pub fn is_constant(&self) -> bool {
        self.grad.iter().all(|&v| v == 0.0) && self.hess.iter().all(|&v| v == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            value: self.value * s,
            grad: self.grad.iter().map(|v| v * s).collect(),
            hess: self.hess.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.value += s;
        out
    }

    /// Composition with a scalar function given its first two derivatives at
    /// `self.value`: `f(x)` has Hessian `f''(x) dx (x) dx + f'(x) d2x`.
    pub fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let d = self.dim();
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = f2 * self.grad[i] * self.grad[j] + f1 * self.hess[i * d + j];
                hess[i * d + j] = v;
                hess[j * d + i] = v;
            }
        }
        Self {
            value: f0,
            grad: self.grad.iter().map(|g| f1 * g).collect(),
            hess,
        }
    }

    fn mul_jet(&self, rhs: &Self) -> Self {
        let d = self.dim();
        debug_assert_eq!(d, rhs.dim(), "jet dimension mismatch");
        let (a, b) = (self.value, rhs.value);
        let mut hess = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = a * rhs.hess[i * d + j]
                    + b * self.hess[i * d + j]
                    + self.grad[i] * rhs.grad[j]
                    + rhs.grad[i] * self.grad[j];
                hess[i * d + j] = v;
                hess[j * d + i] = v;
            }
        }
        Self {
            value: a * b,
            grad: self
                .grad
                .iter()
                .zip(&rhs.grad)
                .map(|(ga, gb)| a * gb + b * ga)
                .collect(),
            hess,
        }
    }

    fn zip_with(&self, rhs: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.dim(), rhs.dim(), "jet dimension mismatch");
        Self {
            value: op(self.value, rhs.value),
            grad: self.grad.iter().zip(&rhs.grad).map(|(a, b)| op(*a, *b)).collect(),
            hess: self.hess.iter().zip(&rhs.hess).map(|(a, b)| op(*a, *b)).collect(),
        }
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        jet_apply(Elementary::Recip, self)
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, JetError> {
        let inv = rhs.recip()?;
        finite(self * &inv, "div", rhs.value)
    }
}

/// Elementary functions understood by [`jet_apply`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    /// Real power `x^c`, requires `x > 0` unless `c` is a non-negative integer.
    Pow(f64),
    Neg,
    Recip,
    Abs,
}

impl Elementary {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Tan => "tan",
            Self::Sinh => "sinh",
            Self::Cosh => "cosh",
            Self::Tanh => "tanh",
            Self::Exp => "exp",
            Self::Log => "log",
            Self::Sqrt => "sqrt",
            Self::Pow(_) => "pow",
            Self::Neg => "neg",
            Self::Recip => "recip",
            Self::Abs => "abs",
        }
    }

    /// `(f(x), f'(x), f''(x))`, or a domain error.
    pub fn taylor(&self, x: f64) -> Result<(f64, f64, f64), JetError> {
        let domain = || JetError::Domain {
            function: self.name(),
            value: x,
        };
        let out = match *self {
            Self::Sin => (x.sin(), x.cos(), -x.sin()),
            Self::Cos => (x.cos(), -x.sin(), -x.cos()),
            Self::Tan => {
                let c = x.cos();
                if c == 0.0 {
                    return Err(domain());
                }
                let t = x.tan();
                let sec2 = 1.0 / (c * c);
                (t, sec2, 2.0 * t * sec2)
            }
            Self::Sinh => (x.sinh(), x.cosh(), x.sinh()),
            Self::Cosh => (x.cosh(), x.sinh(), x.cosh()),
            Self::Tanh => {
                let t = x.tanh();
                let s = 1.0 - t * t;
                (t, s, -2.0 * t * s)
            }
            Self::Exp => {
                let e = x.exp();
                (e, e, e)
            }
            Self::Log => {
                if x <= 0.0 {
                    return Err(domain());
                }
                (x.ln(), 1.0 / x, -1.0 / (x * x))
            }
            Self::Sqrt => {
                if x <= 0.0 {
                    return Err(domain());
                }
                let s = x.sqrt();
                (s, 0.5 / s, -0.25 / (s * x))
            }
            Self::Pow(c) => power_taylor(x, c).ok_or_else(domain)?,
            Self::Neg => (-x, -1.0, 0.0),
            Self::Recip => {
                if x == 0.0 {
                    return Err(domain());
                }
                let r = 1.0 / x;
                (r, -r * r, 2.0 * r * r * r)
            }
            Self::Abs => {
                if x == 0.0 {
                    return Err(domain());
                }
                (x.abs(), x.signum(), 0.0)
            }
        };
        Ok(out)
    }
}

fn power_taylor(x: f64, c: f64) -> Option<(f64, f64, f64)> {
    let is_int = c.fract() == 0.0 && c.abs() < 1e9;
    if is_int {
        let k = c as i32;
        if k == 0 {
            return Some((1.0, 0.0, 0.0));
        }
        if k < 0 && x == 0.0 {
            return None;
        }
        let f0 = x.powi(k);
        let f1 = if k == 1 { 1.0 } else { c * x.powi(k - 1) };
        let f2 = match k {
            1 => 0.0,
            2 => 2.0,
            _ => c * (c - 1.0) * x.powi(k - 2),
        };
        return Some((f0, f1, f2));
    }
    if x <= 0.0 {
        return None;
    }
    // x^c = exp(c log x)
    let f0 = (c * x.ln()).exp();
    Some((f0, c * f0 / x, c * (c - 1.0) * f0 / (x * x)))
}

fn finite(jet: Jet2, function: &'static str, value: f64) -> Result<Jet2, JetError> {
    if jet.is_finite() {
        Ok(jet)
    } else {
        Err(JetError::NonFinite { function, value })
    }
}

/// Applies an elementary function with the second-order chain rule.
pub fn jet_apply(function: Elementary, x: &Jet2) -> Result<Jet2, JetError> {
    let (f0, f1, f2) = function.taylor(x.value)?;
    finite(x.chain(f0, f1, f2), function.name(), x.value)
}

/// Multiplies and checks the result for NaN/Inf.
pub fn checked_mul(a: &Jet2, b: &Jet2) -> Result<Jet2, JetError> {
    finite(a * b, "mul", a.value)
}

impl Add for &Jet2 {
    type Output = Jet2;
    fn add(self, rhs: &Jet2) -> Jet2 {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: &Jet2) -> Jet2 {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: &Jet2) -> Jet2 {
        self.mul_jet(rhs)
    }
}

/// Division without a domain check; dividing by a zero-valued jet yields
/// non-finite components. Use [`Jet2::checked_div`] in evaluation paths.
impl Div for &Jet2 {
    type Output = Jet2;
    fn div(self, rhs: &Jet2) -> Jet2 {
        let r = 1.0 / rhs.value;
        self.mul_jet(&rhs.chain(r, -r * r, 2.0 * r * r * r))
    }
}

impl Neg for &Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &Jet2) -> Jet2 {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}
