//! Completeness classification of iterated-warp profiles and the drop lemma.
//!
//! A profile `u` with first integral `u^{n−2}(u'² + k̄u² − k) = c` satisfies
//! `u'² = P(u)/u^{n−2}` with `P(v) = c − k̄vⁿ + kv^{n−2}`. Since
//! `P'(v) = v^{n−3}(k(n−2) − k̄nv²)`, `P` has at most one positive critical
//! point, so it has either at most two simple positive roots or one double
//! root; those roots decide how `u` behaves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `P(v) = c − k̄vⁿ + kv^{n−2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpPolynomial {
    pub n: usize,
    pub k_bar: f64,
    pub k: f64,
    pub c: f64,
}

impl WarpPolynomial {
    pub fn new(n: usize, k_bar: f64, k: f64, c: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!("n must be at least 3, got {n}")));
        }
        if ![k_bar, k, c].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(Self { n, k_bar, k, c })
    }

    pub fn eval(&self, v: f64) -> f64 {
        let m = self.n as i32;
        self.c - self.k_bar * v.powi(m) + self.k * v.powi(m - 2)
    }

    pub fn derivative(&self, v: f64) -> f64 {
        let n = self.n as f64;
        v.powi(self.n as i32 - 3) * (self.k * (n - 2.0) - self.k_bar * n * v * v)
    }

    /// Magnitude of the terms at `v`, the reference for relative tolerances.
    pub fn scale(&self, v: f64) -> f64 {
        let m = self.n as i32;
        self.c.abs() + self.k_bar.abs() * v.powi(m) + self.k.abs() * v.powi(m - 2)
    }

    /// The positive critical point `√(k(n−2)/(k̄n))`, when `k k̄ > 0`.
    pub fn critical_point(&self) -> Option<f64> {
        (self.k * self.k_bar > 0.0).then(|| {
            let n = self.n as f64;
            (self.k * (n - 2.0) / (self.k_bar * n)).sqrt()
        })
    }

    /// Taylor coefficients `a_j = P^{(j)}(v₀)/j!`, `j = 0..=n`.
    pub fn taylor(&self, v0: f64) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n + 1];
        out[0] = self.eval(v0);
        for (j, a) in out.iter_mut().enumerate().skip(1) {
            let mut v = -self.k_bar * binomial(n, j) * v0.powi((n - j) as i32);
            if j <= n - 2 {
                v += self.k * binomial(n - 2, j) * v0.powi((n - 2 - j) as i32);
            }
            *a = v;
        }
        out
    }

    /// Sign of `P` as `v → 0⁺`.
    fn sign_at_zero(&self) -> f64 {
        if self.c != 0.0 {
            self.c.signum()
        } else if self.k != 0.0 {
            self.k.signum()
        } else {
            -self.k_bar.signum()
        }
    }

    /// A point beyond which the leading term dominates the others tenfold.
    fn dominance_bound(&self) -> Option<f64> {
        let n = self.n as f64;
        if self.k_bar != 0.0 {
            let a = (20.0 * self.k.abs() / self.k_bar.abs()).sqrt();
            let b = (20.0 * self.c.abs() / self.k_bar.abs()).powf(1.0 / n);
            Some(a.max(b).max(1.0))
        } else if self.k != 0.0 {
            Some((20.0 * self.c.abs() / self.k.abs()).powf(1.0 / (n - 2.0)).max(1.0))
        } else {
            None
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: f64,
    pub order: u8,
}

/// Positive roots of `P` in increasing order.
pub fn positive_roots(p: &WarpPolynomial) -> Vec<Root> {
    let Some(vmax) = p.dominance_bound() else {
        return Vec::new();
    };
    if let Some(vs) = p.critical_point() {
        if p.eval(vs).abs() < 1e-9 * p.scale(vs) {
            return vec![Root { value: vs, order: 2 }];
        }
    }
    let mut breaks = vec![0.0];
    if let Some(vs) = p.critical_point() {
        breaks.push(vs);
    }
    breaks.push(vmax.max(breaks.last().copied().unwrap_or(0.0) * 2.0));
    let sign = |v: f64| if v == 0.0 { p.sign_at_zero() } else { p.eval(v).signum() };
    let mut roots = Vec::new();
    for w in breaks.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (sa, sb) = (sign(a), sign(b));
        if sa == sb || sa == 0.0 && sb == 0.0 {
            continue;
        }
        for _ in 0..400 {
            let m = 0.5 * (a + b);
            if b - a <= 1e-15 * b.max(1.0) {
                break;
            }
            if sign(m) == sa {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(Root {
            value: 0.5 * (a + b),
            order: 1,
        });
    }
    roots
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompletenessType {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
    #[serde(rename = "III")]
    III,
    Classical,
    PeriodicEjiri,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    Case1,
    Case2,
    Case3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Growth {
    Linear,
    Exponential,
    Bounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptote {
    pub u0: f64,
    pub growth: Growth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessVerdict {
    #[serde(rename = "type")]
    pub kind: CompletenessType,
    pub roots: Vec<Root>,
    pub case: Option<CaseLabel>,
    pub asymptote: Option<Asymptote>,
    /// Oscillator family for `c = 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    pub explanation: String,
}

/// Assigns the completeness type of profiles with data `(n, k̄, k, c)`.
pub fn classify_warp(n: usize, k_bar: f64, k: f64, c: f64) -> Result<CompletenessVerdict> {
    let p = WarpPolynomial::new(n, k_bar, k, c)?;
    if k_bar == 0.0 && k == 0.0 && c == 0.0 {
        return Err(Error::invalid("k̄, k and c cannot all vanish"));
    }
    let roots = positive_roots(&p);
    let verdict = |kind, case, asymptote, explanation: &str| CompletenessVerdict {
        kind,
        roots: roots.clone(),
        case,
        asymptote,
        family: None,
        explanation: explanation.to_string(),
    };

    if c == 0.0 {
        // u'² = k − k̄u²
        let family = if k_bar > 0.0 && k > 0.0 {
            Some("sin")
        } else if k_bar < 0.0 && k > 0.0 {
            Some("sinh")
        } else if k_bar < 0.0 && k < 0.0 {
            Some("cosh")
        } else if k_bar < 0.0 && k == 0.0 {
            Some("exp")
        } else if k_bar == 0.0 && k > 0.0 {
            Some("linear")
        } else {
            None
        };
        return Ok(match family {
            Some(f) => CompletenessVerdict {
                family: Some(f.to_string()),
                ..verdict(
                    CompletenessType::Classical,
                    None,
                    None,
                    "c = 0: explicit oscillator solution u'² = k − k̄u²",
                )
            },
            None => verdict(
                CompletenessType::Degenerate,
                None,
                None,
                "c = 0 and k − k̄u² < 0 for all u > 0: no non-constant solution",
            ),
        });
    }

    let nf = n as f64;
    Ok(match roots.as_slice() {
        [] => verdict(
            CompletenessType::Degenerate,
            None,
            None,
            "P has no positive root: u is monotone and reaches 0 or blows up",
        ),
        [r] if r.order == 2 => {
            if k_bar < 0.0 && k < 0.0 {
                let expected_c = -2.0 * k_bar * r.value.powi(n as i32) / (nf - 2.0);
                let expected_k = k_bar * r.value * r.value * nf / (nf - 2.0);
                debug_assert!((c - expected_c).abs() < 1e-6 * (1.0 + c.abs()));
                debug_assert!((k - expected_k).abs() < 1e-6 * (1.0 + k.abs()));
                verdict(
                    CompletenessType::I,
                    Some(CaseLabel::Case1),
                    Some(Asymptote {
                        u0: r.value,
                        growth: Growth::Exponential,
                    }),
                    "one positive double root: u tends to u₀ at one end and grows exponentially",
                )
            } else {
                verdict(
                    CompletenessType::Degenerate,
                    Some(CaseLabel::Case1),
                    None,
                    "double root at a maximum of P: P ≤ 0, only the constant solution u = u₀",
                )
            }
        }
        [r] => {
            if k_bar == 0.0 {
                verdict(
                    CompletenessType::II,
                    Some(CaseLabel::Case2),
                    Some(Asymptote {
                        u0: r.value,
                        growth: Growth::Linear,
                    }),
                    "one simple root with k̄ = 0: u ≥ u₀ grows linearly",
                )
            } else if k_bar < 0.0 {
                verdict(
                    CompletenessType::III,
                    Some(CaseLabel::Case2),
                    Some(Asymptote {
                        u0: r.value,
                        growth: Growth::Exponential,
                    }),
                    "one simple root with k̄ < 0: u ≥ u₀ grows exponentially",
                )
            } else {
                verdict(
                    CompletenessType::Degenerate,
                    Some(CaseLabel::Case2),
                    None,
                    "one simple root with k̄ > 0: P > 0 only on (0, u₀), u reaches 0",
                )
            }
        }
        [r1, r2] => {
            if k_bar > 0.0 {
                verdict(
                    CompletenessType::PeriodicEjiri,
                    Some(CaseLabel::Case3),
                    Some(Asymptote {
                        u0: r1.value,
                        growth: Growth::Bounded,
                    }),
                    "two simple roots with k̄ > 0: u oscillates periodically in [u₁, u₂]",
                )
            } else {
                verdict(
                    CompletenessType::III,
                    Some(CaseLabel::Case3),
                    Some(Asymptote {
                        u0: r2.value,
                        growth: Growth::Exponential,
                    }),
                    "two simple roots with k̄ < 0: the branch u ≥ u₂ grows exponentially",
                )
            }
        }
        _ => unreachable!("P has at most two positive roots"),
    })
}

/// Largest `m` handled in exact 128-bit arithmetic.
pub const DROP_MAX_M: u32 = 60;

/// Coefficients (constant term first) of
/// `φ_m(x) = (x−1)^m (x+m) − (x+1)^m (x−m)`.
pub fn drop_coefficients(m: u32) -> Result<Vec<i128>> {
    if m > DROP_MAX_M {
        return Err(Error::invalid(format!(
            "m = {m} exceeds the supported maximum {DROP_MAX_M}"
        )));
    }
    let m_us = m as usize;
    let mut binom = vec![1i128; m_us + 1];
    for k in 1..=m_us {
        binom[k] = binom[k - 1] * (m_us - k + 1) as i128 / k as i128;
    }
    // (x−1)^m = Σ C(m,k) (−1)^{m−k} x^k, (x+1)^m = Σ C(m,k) x^k
    let minus: Vec<i128> = (0..=m_us)
        .map(|k| {
            if (m_us - k).is_multiple_of(2) {
                binom[k]
            } else {
                -binom[k]
            }
        })
        .collect();
    let plus = &binom;
    let mi = m as i128;
    let mut out = vec![0i128; m_us + 2];
    for k in 0..=m_us {
        // (x−1)^m (x+m)
        out[k + 1] += minus[k];
        out[k] += mi * minus[k];
        // −(x+1)^m (x−m)
        out[k + 1] -= plus[k];
        out[k] += mi * plus[k];
    }
    while out.len() > 1 && *out.last().expect("non-empty") == 0 {
        out.pop();
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DropLemmaReport {
    pub m: u32,
    /// `a_k`, constant term first.
    pub coefficients: Vec<i128>,
    /// All `a_k ≥ 0` and some `a_k > 0`, hence no zero on `x > 0`.
    pub no_positive_zero: bool,
    /// `a_k > 0` for `k ≡ m (mod 2)`, `0 ≤ k ≤ m−2`, all other `a_k = 0`.
    pub parity_positive: bool,
    /// `φ_m' = (m+1) φ_{m−1}` coefficientwise.
    pub recursion_holds: bool,
}

pub fn drop_polynomial(m: u32) -> Result<DropLemmaReport> {
    if m < 2 {
        return Err(Error::invalid(format!("m must be at least 2, got {m}")));
    }
    let coefficients = drop_coefficients(m)?;
    let no_positive_zero = coefficients.iter().all(|&a| a >= 0) && coefficients.iter().any(|&a| a > 0);
    let mu = m as usize;
    let parity_positive = (0..=mu + 1).all(|k| {
        let a = coefficients.get(k).copied().unwrap_or(0);
        if k + 2 <= mu && k % 2 == mu % 2 {
            a > 0
        } else {
            a == 0
        }
    });
    let prev = drop_coefficients(m - 1)?;
    let derivative: Vec<i128> = coefficients
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| k as i128 * a)
        .collect();
    let len = derivative.len().max(prev.len());
    let recursion_holds = (0..len)
        .all(|k| derivative.get(k).copied().unwrap_or(0) == (m as i128 + 1) * prev.get(k).copied().unwrap_or(0));
    Ok(DropLemmaReport {
        m,
        coefficients,
        no_positive_zero,
        parity_positive,
        recursion_holds,
    })
}

/// Evaluates `φ_m` from its coefficients.
pub fn drop_eval(coefficients: &[i128], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &a| acc * x + a as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropInstance {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    /// `√(1 + (n−2)nαβ)`
    pub y: f64,
    /// `(y − 1)/(nβ)`
    pub a: f64,
    /// `(y + 1)/(nβ)`
    pub b: f64,
    /// `−(2A^{n−1}/(n−2))(βA + 1)`
    pub gamma_a: f64,
    /// `(2B^{n−1}/(n−2))(1 − βB)`
    pub gamma_b: f64,
    /// `g(A) = α − βA² + γ_A A^{2−n}`
    pub g_at_a: f64,
    /// `|g(A)| < 1e-10`
    pub a_root_consistent: bool,
    /// Whether `γ_A = γ_B` (to `1e-10`), i.e. both drops can be realised by
    /// one profile.
    pub simultaneous_drop: bool,
}

pub fn drop_instance(n: usize, alpha: f64, beta: f64) -> Result<DropInstance> {
    if n < 3 {
        return Err(Error::invalid(format!("n must be at least 3, got {n}")));
    }
    if !(alpha * beta > 0.0) {
        return Err(Error::invalid("need αβ > 0"));
    }
    let nf = n as f64;
    let y = (1.0 + (nf - 2.0) * nf * alpha * beta).sqrt();
    let a = (y - 1.0) / (nf * beta);
    let b = (y + 1.0) / (nf * beta);
    let gamma_a = -(2.0 * a.powi(n as i32 - 1) / (nf - 2.0)) * (beta * a + 1.0);
    let gamma_b = (2.0 * b.powi(n as i32 - 1) / (nf - 2.0)) * (1.0 - beta * b);
    let g_at_a = alpha - beta * a * a + gamma_a * a.powi(2 - n as i32);
    Ok(DropInstance {
        n,
        alpha,
        beta,
        y,
        a,
        b,
        gamma_a,
        gamma_b,
        g_at_a,
        a_root_consistent: g_at_a.abs() < 1e-10,
        simultaneous_drop: (gamma_a - gamma_b).abs() < 1e-10,
    })
}
