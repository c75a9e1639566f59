//! Fixed-step classical Runge–Kutta integration.

/// One RK4 step of size `h` for `y' = f(t, y)`.
#[inline]
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N] + ?Sized,
{
    let add = |a: &[f64; N], b: &[f64; N], s: f64| -> [f64; N] {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = f(t + h, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Result of [`integrate`]: nodes in integration order.
#[derive(Debug, Clone)]
pub struct Path<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    /// Parameter at which `stop` fired, if it did.
    pub stopped_at: Option<f64>,
}

/// Integrates from `t0` to `t1` (either direction) with step `h > 0`. The
/// last step is shortened so the path ends exactly at `t1`. Integration
/// stops early, keeping the offending node out of the path, as soon as
/// `stop` returns true for a new state.
pub fn integrate<const N: usize, F, S>(f: &F, t0: f64, t1: f64, h: f64, y0: [f64; N], stop: S) -> Path<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N] + ?Sized,
    S: Fn(&[f64; N]) -> bool,
{
    assert!(h > 0.0 && h.is_finite(), "step must be positive");
    let span = t1 - t0;
    let dir = span.signum();
    let steps = ((span.abs() / h) - 1e-9).ceil().max(0.0) as usize;
    let mut t = vec![t0];
    let mut y = vec![y0];
    let mut stopped_at = None;
    let mut cur = y0;
    for i in 0..steps {
        let ta = t0 + dir * h * i as f64;
        let tb = if i + 1 == steps {
            t1
        } else {
            t0 + dir * h * (i + 1) as f64
        };
        let next = rk4_step(f, ta, &cur, tb - ta);
        if stop(&next) || next.iter().any(|v| !v.is_finite()) {
            stopped_at = Some(tb);
            break;
        }
        cur = next;
        t.push(tb);
        y.push(cur);
    }
    Path { t, y, stopped_at }
}
