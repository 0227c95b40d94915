//! The implicit gap function of the Majorana wire.
//!
//! `f0` inverts y = x/tan(x) on its principal branch x ∈ (0, π). For y > 1
//! there is no real solution; the branch is continued to x = iκ with
//! κ/tanh(κ) = y, so that f0² = -κ².

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::roots::bracketed_root;

/// x·cot(x), with the removable singularity at 0 filled in.
fn x_cot_x(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x / x.tan()
    }
}

fn x_cot_x_slope(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let s = x.sin();
    x.cos() / s - x / (s * s)
}

fn x_coth_x(k: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        k / k.tanh()
    }
}

fn x_coth_x_slope(k: f64) -> f64 {
    if k == 0.0 {
        return 0.0;
    }
    let s = k.sinh();
    k.cosh() / s - k / (s * s)
}

/// Unique x ∈ [0, π) with x/tan(x) = y, for y ≤ 1.
pub fn f0_inverse(y: f64) -> Result<f64> {
    if y.is_nan() || y > 1.0 {
        return Err(Error::Domain(format!(
            "f0_inverse requires y <= 1, got {y}; use f0_squared for the continued branch"
        )));
    }
    if y == 1.0 {
        return Ok(0.0);
    }
    if y == 0.0 {
        return Ok(PI / 2.0);
    }
    let upper = PI * (1.0 - f64::EPSILON);
    bracketed_root(|x| x_cot_x(x) - y, x_cot_x_slope, 0.0, upper)
}

/// κ > 0 with κ/tanh(κ) = y, for y > 1.
fn continued_root(y: f64) -> Result<f64> {
    // κ/tanh κ >= κ, so the root never exceeds y
    bracketed_root(|k| x_coth_x(k) - y, x_coth_x_slope, 0.0, y)
}

/// f0(y)² on the principal branch, continued as -κ² for y > 1.
pub fn f0_squared(y: f64) -> Result<f64> {
    if y.is_nan() {
        return Err(Error::Domain("f0_squared of NaN".into()));
    }
    if y <= 1.0 {
        let x = f0_inverse(y)?;
        Ok(x * x)
    } else {
        let k = continued_root(y)?;
        Ok(-k * k)
    }
}

/// √(y² + f0²(y)), the splitting in units of v_F/L.
///
/// Substituting y = x·cot(x) gives y² + x² = x²/sin²(x), and likewise
/// κ²/sinh²(κ) on the continued branch, which avoids the cancellation
/// between y² and κ² deep in the suppressed regime.
pub fn reduced_splitting(y: f64) -> Result<f64> {
    if y.is_nan() {
        return Err(Error::Domain("reduced_splitting of NaN".into()));
    }
    if y == 1.0 {
        return Ok(1.0);
    }
    if y < 1.0 {
        let x = f0_inverse(y)?;
        Ok(if x == 0.0 { 1.0 } else { x / x.sin() })
    } else {
        let k = continued_root(y)?;
        Ok(if k == 0.0 { 1.0 } else { k / k.sinh() })
    }
}
