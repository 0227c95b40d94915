//! Bath correlation integrals of the phase-controller mode.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::units::bose_occupation;

/// Plasma mode of the phase controller: frequency, damping and thermal
/// occupation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpcMode {
    pub omega_p: f64,
    pub gamma_p: f64,
    pub n_p: f64,
}

impl QpcMode {
    pub fn from_params(p: &DeviceParams) -> Self {
        Self {
            omega_p: p.omega_p,
            gamma_p: p.gamma_p,
            n_p: bose_occupation(p.omega_p, p.temperature),
        }
    }
}

/// J(ω_t) = γ_p(N_p+1)/(2ω_p) [(iω_t + iω_p - γ_p/2)⁻¹ - (iω_t - iω_p - γ_p/2)⁻¹].
pub fn correlation_j(omega_t: f64, m: &QpcMode) -> Complex64 {
    let half = Complex64::new(-0.5 * m.gamma_p, 0.0);
    let plus = Complex64::new(0.0, omega_t + m.omega_p) + half;
    let minus = Complex64::new(0.0, omega_t - m.omega_p) + half;
    m.gamma_p * (m.n_p + 1.0) / (2.0 * m.omega_p) * (plus.inv() - minus.inv())
}

/// K(ω_t) = γ_p N_p/(2ω_p) [(-iω_t + iω_p - γ_p/2)⁻¹ - (-iω_t - iω_p - γ_p/2)⁻¹].
pub fn correlation_k(omega_t: f64, m: &QpcMode) -> Complex64 {
    let half = Complex64::new(-0.5 * m.gamma_p, 0.0);
    let plus = Complex64::new(0.0, -omega_t + m.omega_p) + half;
    let minus = Complex64::new(0.0, -omega_t - m.omega_p) + half;
    m.gamma_p * m.n_p / (2.0 * m.omega_p) * (plus.inv() - minus.inv())
}

/// Half-sided transform of the regression-theorem correlator
/// ⟨b(τ)b†(0)⟩ = (N_p+1) e^{-iω_pτ - γ_pτ/2}:
/// (N_p+1) / (γ_p/2 + i(ω_p - ω_t)).
pub fn regression_j(omega_t: f64, m: &QpcMode) -> Complex64 {
    (m.n_p + 1.0) / Complex64::new(0.5 * m.gamma_p, m.omega_p - omega_t)
}

/// Half-sided transform of ⟨b†(τ)b(0)⟩ = N_p e^{iω_pτ - γ_pτ/2} at -ω_t.
pub fn regression_k(omega_t: f64, m: &QpcMode) -> Complex64 {
    m.n_p / Complex64::new(0.5 * m.gamma_p, omega_t - m.omega_p)
}

/// Qubit decay rate obtained by eliminating the mode behind an exchange
/// coupling -(g'/2)(bσ⁺ + b†σ⁻): (g'/2)² · 2 Re J.
pub fn elimination_rate(g_prime: f64, j: Complex64) -> f64 {
    0.25 * g_prime * g_prime * 2.0 * j.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::TWO_PI;

    fn mode() -> QpcMode {
        QpcMode {
            omega_p: TWO_PI * 4.3e9,
            gamma_p: TWO_PI * 1e6,
            n_p: 2.6e-4,
        }
    }

    #[test]
    fn k_vanishes_without_thermal_quanta() {
        let m = QpcMode { n_p: 0.0, ..mode() };
        for w in [0.0, 1e9, 7e10] {
            assert_eq!(correlation_k(w, &m), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn j_at_zero_frequency() {
        let m = mode();
        let expected = Complex64::new(0.0, -m.gamma_p * (m.n_p + 1.0))
            / (m.omega_p * m.omega_p + 0.25 * m.gamma_p * m.gamma_p);
        let j = correlation_j(0.0, &m);
        assert!((j - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn regression_rate_is_purcell_form() {
        let m = mode();
        let wt = TWO_PI * 1e9;
        let gp = TWO_PI * -100e6;
        let delta = m.omega_p - wt;
        let purcell = (0.5 * gp).powi(2) * m.gamma_p * (m.n_p + 1.0)
            / (delta * delta + 0.25 * m.gamma_p * m.gamma_p);
        let r = elimination_rate(gp, regression_j(wt, &m));
        assert!(((r - purcell) / purcell).abs() < 1e-12);
    }
}
