//! Riemann zeta sums for real exponents `alpha > 1`.
//!
//! Every sum is a finite partial sum followed by an Euler-Maclaurin tail.
//! For `f(x) = x^-alpha` the corrections alternate in sign, so
//!
//! ```text
//! sum_{v >= V} f(v)  in  [I + f(V)/2,  I + f(V)/2 - f'(V)/12],   I = V^(1-alpha)/(alpha-1)
//! ```
//!
//! `V` is chosen so the bracket width `alpha V^(-alpha-1) / 12` is at most
//! the requested tolerance and the midpoint is returned.

use crate::error::{Error, Result};

/// Smallest exponent accepted by any zeta-based routine.
pub const MIN_ALPHA: f64 = 1.0 + 1e-6;

/// Default absolute tolerance for zeta evaluations.
pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_CUTOFF: u64 = 1 << 27;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > MIN_ALPHA {
        Ok(())
    } else {
        Err(Error::domain(format!("zeta divergent at alpha = {alpha}")))
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

/// First index at which the tail bracket is narrower than `tol`.
pub(crate) fn cutoff(alpha: f64, tol: f64) -> u64 {
    let v = (alpha / (12.0 * tol)).powf(1.0 / (alpha + 1.0)).ceil();
    if v.is_finite() {
        (v as u64).clamp(2, MAX_CUTOFF)
    } else {
        MAX_CUTOFF
    }
}

/// Lower and upper bounds on `sum_{v >= start} v^-alpha` when no terms are
/// summed explicitly.
pub(crate) fn tail_bracket(alpha: f64, start: u64) -> (f64, f64) {
    let v = start as f64;
    let integral = v.powf(1.0 - alpha) / (alpha - 1.0);
    let lo = integral + 0.5 * v.powf(-alpha);
    (lo, lo + alpha * v.powf(-alpha - 1.0) / 12.0)
}

/// `sum_{v >= start} v^-alpha` to absolute accuracy `tol`.
pub(crate) fn hurwitz_tail(alpha: f64, start: u64, tol: f64) -> f64 {
    let start = start.max(1);
    let upper = start.max(cutoff(alpha, tol));
    let (lo, hi) = tail_bracket(alpha, upper);
    // smallest terms first
    let partial: f64 = (start..upper).rev().map(|v| (v as f64).powf(-alpha)).sum();
    partial + 0.5 * (lo + hi)
}

/// Riemann zeta `sum_{v >= 1} v^-alpha` within absolute error `tol`.
pub fn zeta(alpha: f64, tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_tol(tol)?;
    Ok(hurwitz_tail(alpha, 1, tol))
}

/// `-zeta'(alpha) = sum_{v >= 2} ln(v) v^-alpha`.
pub(crate) fn neg_zeta_derivative(alpha: f64, tol: f64) -> f64 {
    let upper = cutoff(alpha, tol).max(16);
    let partial: f64 = (2..upper)
        .rev()
        .map(|v| {
            let x = v as f64;
            x.ln() * x.powf(-alpha)
        })
        .sum();
    let x = upper as f64;
    let lx = x.ln();
    let am1 = alpha - 1.0;
    let integral = x.powf(1.0 - alpha) * (lx / am1 + 1.0 / (am1 * am1));
    let g = lx * x.powf(-alpha);
    let dg = x.powf(-alpha - 1.0) * (1.0 - alpha * lx);
    partial + integral + 0.5 * g - dg / 12.0
}

/// Expected log-value `E[ln v]` of the zeta distribution, `-zeta'(a)/zeta(a)`.
pub(crate) fn mean_log_value(alpha: f64, tol: f64) -> f64 {
    neg_zeta_derivative(alpha, tol) / hurwitz_tail(alpha, 1, tol)
}
