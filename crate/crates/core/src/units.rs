//! Physical constants (CODATA 2018, exact SI values where defined) and
//! frequency helpers.

use std::f64::consts::PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Superconducting flux quantum h/2e.
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

pub const TWO_PI: f64 = 2.0 * PI;

/// f (Hz) -> ω (rad/s).
#[inline]
pub fn angular(freq_hz: f64) -> f64 {
    TWO_PI * freq_hz
}

/// ω (rad/s) -> f (Hz).
#[inline]
pub fn cycles(omega: f64) -> f64 {
    omega / TWO_PI
}

/// Bose-Einstein occupation 1/(exp(ħω/k_BT) - 1).
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    let x = HBAR * omega / (BOLTZMANN * temperature);
    1.0 / x.exp_m1()
}
