//! Petz functions: the scalar family `f_α` and the named presets.
//!
//! With `β = 1/α`,
//!
//! ```text
//! f_α(t) = (1 − α) (1 − t^β) / (1 − t^(β−1))
//! ```
//!
//! Every member satisfies `f(1) = 1` and `f(t) = t f(1/t)`. The family is operator
//! monotone exactly for `α ∈ (−∞, −1] ∪ [1/2, ∞)`; `α = 1/2` is the SLD function
//! and `α = −1` the rRLD one. At `α = 1` the formula has a removable singularity
//! whose value is the Kubo–Mori function `(t − 1)/ln t`; as `α → ±∞` it tends to
//! `t ln t/(t − 1)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{QngError, Result};

/// Beyond this magnitude `Alpha(α)` is evaluated as its `α → ±∞` limit.
pub const ALPHA_CAP: f64 = 1e6;

/// Additive slack used by the pointwise order predicate.
pub const ORDER_TOL: f64 = 1e-12;

/// Below this distance from `t = 1` the second-order expansion is used.
const SERIES_RADIUS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PetzFunction {
    /// `f_α`, with `α ≠ 0`.
    Alpha(f64),
    /// `(1 + t)/2`, the maximal monotone Petz function.
    Sld,
    /// `2t/(1 + t)`, the minimal monotone Petz function.
    Rrld,
    /// `(t − 1)/ln t`, the `α → 1` limit of `f_α`.
    KuboMori,
    /// `t ln t/(t − 1)`, the `α → ±∞` limit of `f_α`.
    AlphaInfinity,
}

impl PetzFunction {
    /// Checked constructor for `Alpha(α)`.
    pub fn alpha(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::Alpha(alpha))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(QngError::InvalidParameter(format!(
                "Petz function argument must be positive and finite, got {t}"
            )));
        }
        Ok(match *self {
            Self::Sld => 0.5 * (1.0 + t),
            Self::Rrld => 2.0 * t / (1.0 + t),
            Self::KuboMori => kubo_mori(t),
            Self::AlphaInfinity => t / kubo_mori(t),
            Self::Alpha(alpha) => {
                check_alpha(alpha)?;
                if alpha == 1.0 {
                    kubo_mori(t)
                } else if alpha.abs() >= ALPHA_CAP {
                    t / kubo_mori(t)
                } else {
                    f_alpha(alpha, t)
                }
            }
        })
    }

    /// Whether this function lies in the operator-monotone class.
    pub fn is_operator_monotone(&self) -> bool {
        match *self {
            Self::Alpha(a) => is_in_monotone_window(a).unwrap_or(false),
            _ => true,
        }
    }

    /// Short label used in CSV output.
    pub fn label(&self) -> String {
        match self {
            Self::Alpha(a) => format!("{a}"),
            Self::Sld => "sld".into(),
            Self::Rrld => "rrld".into(),
            Self::KuboMori => "km".into(),
            Self::AlphaInfinity => "inf".into(),
        }
    }
}

impl fmt::Display for PetzFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PetzFunction {
    type Err = QngError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sld" => Ok(Self::Sld),
            "rrld" => Ok(Self::Rrld),
            "km" | "kubo-mori" | "kubomori" => Ok(Self::KuboMori),
            "inf" | "alpha-inf" => Ok(Self::AlphaInfinity),
            other => {
                let a: f64 = other.parse().map_err(|_| {
                    QngError::InvalidParameter(format!("cannot parse Petz function `{s}`"))
                })?;
                Self::alpha(a)
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(QngError::InvalidParameter(format!(
            "alpha must be finite and nonzero, got {alpha}"
        )));
    }
    Ok(())
}

fn kubo_mori(t: f64) -> f64 {
    if t == 1.0 {
        return 1.0;
    }
    let u = t - 1.0;
    u / u.ln_1p()
}

/// `f_α(t)` for `α ∉ {0, 1}`, written through `expm1` so that neither the
/// neighbourhood of `t = 1` nor large `|β ln t|` loses precision.
fn f_alpha(alpha: f64, t: f64) -> f64 {
    if t == 1.0 {
        return 1.0;
    }
    let beta = 1.0 / alpha;
    let l = (t - 1.0).ln_1p();

    if (t - 1.0).abs() < SERIES_RADIUS && (beta.abs() + 1.0) * l.abs() < 1e-4 {
        // 1 + L/2 + (β + 1) L²/12 + O(L³)
        return 1.0 + 0.5 * l + (beta + 1.0) * l * l / 12.0;
    }
    f_alpha_expm1(alpha, t, l)
}

fn f_alpha_expm1(alpha: f64, t: f64, l: f64) -> f64 {
    let beta = 1.0 / alpha;
    // β − 1 = (1 − α)/α; 1 − α is exact near α = 1.
    let gamma = (1.0 - alpha) / alpha;
    let a = beta * l;
    let b = gamma * l;
    // (1 − t^β)/(1 − t^(β−1)) = expm1(a)/expm1(b). When both exponents are
    // positive, factor out t^(a−b) = t to keep everything bounded.
    let ratio = if a > 0.0 && b > 0.0 {
        t * ((-a).exp_m1() / (-b).exp_m1())
    } else {
        a.exp_m1() / b.exp_m1()
    };
    (1.0 - alpha) * ratio
}

/// Whether `f_α` is operator monotone: `α ≤ −1` or `α ≥ 1/2`.
pub fn is_in_monotone_window(alpha: f64) -> Result<bool> {
    if alpha == 0.0 || alpha.is_nan() {
        return Err(QngError::InvalidParameter(format!(
            "alpha must be nonzero, got {alpha}"
        )));
    }
    Ok(alpha <= -1.0 || alpha >= 0.5)
}

/// Grid witness of `f ⪯ g`: true iff `f(t) ≤ g(t) + 1e-12` at every grid point.
pub fn petz_pointwise_leq(f: &PetzFunction, g: &PetzFunction, grid: &[f64]) -> Result<bool> {
    Ok(max_pointwise_excess(f, g, grid)? <= ORDER_TOL)
}

/// `max_t (f(t) − g(t))` over the grid.
pub fn max_pointwise_excess(f: &PetzFunction, g: &PetzFunction, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(QngError::InvalidParameter("empty grid".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    for &t in grid {
        worst = worst.max(f.eval(t)? - g.eval(t)?);
    }
    Ok(worst)
}

/// `n` log-spaced points on `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 1);
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// 512 log-spaced points on `[1e-3, 1e3]`.
pub fn default_order_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 512)
}
