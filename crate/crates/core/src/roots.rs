//! Bracketing root finder for the implicit gap function.
//!
//! Bisection narrows the bracket to [`BRACKET_WIDTH`], then a fixed number
//! of Newton steps polish the midpoint. Newton iterates that leave the
//! final bracket are discarded.

use crate::error::{Error, Result};

pub const BRACKET_WIDTH: f64 = 1e-13;
pub const NEWTON_STEPS: usize = 3;
const MAX_BISECTIONS: usize = 400;

/// Finds the root of `f` in `[lo, hi]`, where `f(lo)` and `f(hi)` have
/// opposite signs.
pub fn bracketed_root<F, D>(f: F, df: D, mut lo: f64, mut hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Convergence(format!(
            "no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})"
        )));
    }

    let mut iterations = 0;
    while hi - lo > BRACKET_WIDTH {
        let mid = 0.5 * (lo + hi);
        // bracket cannot shrink further in floating point
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations > MAX_BISECTIONS {
            return Err(Error::Convergence(format!(
                "bisection budget exhausted with bracket [{lo}, {hi}]"
            )));
        }
    }

    let mut x = 0.5 * (lo + hi);
    let mut fx = f(x);
    for _ in 0..NEWTON_STEPS {
        let slope = df(x);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = x - fx / slope;
        if !(lo..=hi).contains(&next) {
            break;
        }
        let f_next = f(next);
        if f_next.abs() > fx.abs() {
            break;
        }
        x = next;
        fx = f_next;
    }
    Ok(x)
}
