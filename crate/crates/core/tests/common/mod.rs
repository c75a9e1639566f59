//! Reference computations shared by the integration tests.
//!
//! Curvature here is assembled from metric values alone (fourth-order
//! central differences), so it shares no code path with the jet engine.

#![allow(dead_code, clippy::needless_range_loop)]

use einstein_forge::{DomainBox, MetricSpec};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const FD_STEP: f64 = 1e-3;

/// Uniform random points in a box, reproducible from `seed`.
pub fn random_points(domain: &DomainBox, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let unit: Vec<f64> = (0..domain.dim()).map(|_| rng.random::<f64>()).collect();
            domain.map_unit(&unit)
        })
        .collect()
}

fn shifted(p: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut q = p.to_vec();
    for &(i, dx) in moves {
        q[i] += dx;
    }
    q
}

const D1: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];

/// `(g, ∂g, ∂∂g)` with `dg[m][(i,j)]`, `ddg[m][n][(i,j)]`.
#[allow(clippy::type_complexity)]
pub fn metric_derivatives(
    spec: &MetricSpec,
    p: &[f64],
    h: f64,
) -> (DMatrix<f64>, Vec<DMatrix<f64>>, Vec<Vec<DMatrix<f64>>>) {
    let d = p.len();
    let g = |q: &[f64]| spec.values_at(q).expect("metric defined near the point");
    let g0 = g(p);
    let dg: Vec<DMatrix<f64>> = (0..d)
        .map(|m| {
            D1.iter()
                .map(|&(s, w)| g(&shifted(p, &[(m, s * h)])) * w)
                .fold(DMatrix::zeros(d, d), |a, b| a + b)
                / (12.0 * h)
        })
        .collect();
    let mut ddg = vec![vec![DMatrix::zeros(d, d); d]; d];
    for m in 0..d {
        for n in m..d {
            let v = if m == n {
                let w = [(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)];
                w.iter()
                    .map(|&(s, c)| g(&shifted(p, &[(m, s * h)])) * c)
                    .fold(DMatrix::zeros(d, d), |a, b| a + b)
                    / (12.0 * h * h)
            } else {
                let mut acc = DMatrix::zeros(d, d);
                for &(s, a) in &D1 {
                    for &(t, b) in &D1 {
                        acc += g(&shifted(p, &[(m, s * h), (n, t * h)])) * (a * b);
                    }
                }
                acc / (144.0 * h * h)
            };
            ddg[m][n] = v.clone();
            ddg[n][m] = v;
        }
    }
    (g0, dg, ddg)
}

/// Ricci tensor `R_jk = ∂_iΓ^i_jk − ∂_kΓ^i_ij + Γ^i_ipΓ^p_jk − Γ^i_kpΓ^p_ij`
/// from finite differences of the metric.
pub fn fd_ricci(spec: &MetricSpec, p: &[f64], h: f64) -> DMatrix<f64> {
    let d = p.len();
    let (g, dg, ddg) = metric_derivatives(spec, p, h);
    let gi = g.clone().try_inverse().expect("nonsingular metric");
    // ∂_m g^{kl} = −g^{ka} ∂_m g_ab g^{bl}
    let dgi: Vec<DMatrix<f64>> = dg.iter().map(|a| -(&gi * a * &gi)).collect();
    // first-kind symbols and their derivatives
    let gamma1 = |l: usize, i: usize, j: usize| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
    let dgamma1 =
        |m: usize, l: usize, i: usize, j: usize| 0.5 * (ddg[m][i][(j, l)] + ddg[m][j][(i, l)] - ddg[m][l][(i, j)]);
    let gamma = |k: usize, i: usize, j: usize| (0..d).map(|l| gi[(k, l)] * gamma1(l, i, j)).sum::<f64>();
    let dgamma = |m: usize, k: usize, i: usize, j: usize| {
        (0..d)
            .map(|l| dgi[m][(k, l)] * gamma1(l, i, j) + gi[(k, l)] * dgamma1(m, l, i, j))
            .sum::<f64>()
    };
    let mut ric = DMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            let mut r = 0.0;
            for i in 0..d {
                r += dgamma(i, i, j, k) - dgamma(k, i, i, j);
                for q in 0..d {
                    r += gamma(i, i, q) * gamma(q, j, k) - gamma(i, k, q) * gamma(q, i, j);
                }
            }
            ric[(j, k)] = r;
        }
    }
    ric
}
