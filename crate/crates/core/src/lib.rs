//! Numerical toolkit for Einstein metrics built from products, warped
//! products and conformal changes.
//!
//! The crate is organised bottom-up:
//!
//! * [`jets`]: second-order automatic differentiation,
//! * [`dsl`]: the metric description language,
//! * [`curvature`]: Christoffel symbols, Riemann/Ricci tensors, Hessians,
//! * [`conformal`]: conformal change of Ricci curvature and related criteria,
//! * [`odes`]: the ordinary differential equations behind the constructions,
//! * [`classify`]: root analysis of the warp polynomial and the drop lemma,
//! * [`catalog`]: named fixtures with expected outcomes.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod classify;
pub mod conformal;
pub mod curvature;
pub mod dsl;
pub mod error;
pub mod grid;
pub mod jets;
pub mod odes;

pub use classify::{classify_warp, drop_instance, drop_polynomial, CompletenessType, CompletenessVerdict};
pub use conformal::{conformally_einstein_residual, ConformalPair};
pub use curvature::{
    curvature_at, einstein_residual, hessian_at, CurvatureReport, EinsteinReport, Geometry, HessianSnapshot,
};
pub use dsl::{parse_expr, parse_metric, Expr, MetricSpec, Signature};
pub use error::{Error, Result};
pub use grid::DomainBox;
pub use jets::{jet_apply, Elementary, Jet2};
