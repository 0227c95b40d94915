//! Device constants and the closed-form physics chain that turns them into
//! the rates and couplings of the master equation.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::reduced_splitting;
use crate::units::{bose_occupation, BOLTZMANN, FLUX_QUANTUM, PLANCK, TWO_PI};

/// Serde adapter: rad/s in memory, ω/2π in Hz on disk.
pub(crate) mod angular_hz {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(crate::units::cycles(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d).map(crate::units::angular)
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => s.serialize_some(&crate::units::cycles(*x)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Ok(Option::<f64>::deserialize(d)?.map(crate::units::angular))
        }
    }
}

/// How a mode frequency quoted as "f Hz" enters as a rate or an energy
/// offset.
///
/// `Cycle` uses the numerical value of f (γ_r = f_r/Q_r), `Angular` uses
/// 2πf (γ_r = ω_r/Q_r). The published fidelities are only reproduced by
/// `Cycle`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateConvention {
    #[default]
    Cycle,
    Angular,
}

impl RateConvention {
    /// Numerical value used for a mode with angular frequency `omega`.
    pub fn rate_of(self, omega: f64) -> f64 {
        match self {
            RateConvention::Cycle => omega / TWO_PI,
            RateConvention::Angular => omega,
        }
    }
}

/// Physical constants of the wire, resonator and phase controller.
///
/// Angular frequencies are stored in rad/s. In config files they appear
/// as `<name>_over_2pi_hz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    #[serde(rename = "delta0_over_2pi_hz", with = "angular_hz")]
    pub delta0: f64,
    pub wire_length: f64,
    pub wire_width: f64,
    /// The product μW, as an angle.
    pub chem_potential: f64,
    pub surface_velocity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fermi_velocity_override: Option<f64>,
    pub loop_area: f64,
    pub field_gradient: f64,
    pub zero_point_amp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ec_over_el: Option<f64>,
    #[serde(rename = "omega_r_over_2pi_hz", with = "angular_hz")]
    pub omega_r: f64,
    #[serde(rename = "omega_p_over_2pi_hz", with = "angular_hz")]
    pub omega_p: f64,
    #[serde(rename = "gamma_p_over_2pi_hz", with = "angular_hz")]
    pub gamma_p: f64,
    pub quality_factor: f64,
    pub temperature: f64,
    pub theta_on: f64,
    pub theta_off: f64,
    #[serde(default)]
    pub rate_convention: RateConvention,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(field, format!("must be finite and > 0, got {v}")))
    }
}

impl DeviceParams {
    /// The device of the worked example: Δ₀ = 25(2π) GHz, L = 5 μm,
    /// v_F = 2.2e4 m/s, S = 1 μm², G = 1e8 T/m, u₀ = 15 fm, ζ = 0.01,
    /// ω_p = 4.3(2π) GHz, T = 25 mK.
    pub fn example() -> Self {
        Self {
            delta0: TWO_PI * 25e9,
            wire_length: 5e-6,
            wire_width: 1e-7,
            chem_potential: 0.0,
            surface_velocity: 5e5,
            fermi_velocity_override: Some(2.2e4),
            loop_area: 1e-12,
            field_gradient: 1e8,
            zero_point_amp: 15e-15,
            zeta: Some(0.01),
            ec_over_el: None,
            omega_r: TWO_PI * 1e9,
            omega_p: TWO_PI * 4.3e9,
            gamma_p: TWO_PI * 1e6,
            quality_factor: 1e3,
            temperature: 25e-3,
            theta_on: 0.09,
            theta_off: 3.1,
            rate_convention: RateConvention::Cycle,
        }
    }

    /// Wire parameters tuned so that the closed-form chain lands on the
    /// simulation couplings: E(θ_on) = 1(2π) GHz, g ≈ -20(2π) MHz,
    /// g' = -100(2π) MHz at θ_on = 0.09, with ζ = 0.01.
    pub fn calibrated() -> Self {
        Self {
            delta0: TWO_PI * 85.279_426_8e9,
            fermi_velocity_override: Some(5.759_474_6e4),
            loop_area: 0.45e-12,
            ..Self::example()
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("delta0_over_2pi_hz", self.delta0)?;
        positive("wire_length", self.wire_length)?;
        positive("wire_width", self.wire_width)?;
        positive("surface_velocity", self.surface_velocity)?;
        if let Some(v) = self.fermi_velocity_override {
            positive("fermi_velocity_override", v)?;
        }
        if !self.chem_potential.is_finite() {
            return Err(Error::param("chem_potential", "must be finite"));
        }
        positive("loop_area", self.loop_area)?;
        positive("field_gradient", self.field_gradient)?;
        positive("zero_point_amp", self.zero_point_amp)?;
        match (self.zeta, self.ec_over_el) {
            (Some(z), None) => positive("zeta", z)?,
            (None, Some(r)) => positive("ec_over_el", r)?,
            _ => {
                return Err(Error::param(
                    "zeta",
                    "exactly one of `zeta` and `ec_over_el` must be given",
                ))
            }
        }
        positive("omega_r_over_2pi_hz", self.omega_r)?;
        positive("omega_p_over_2pi_hz", self.omega_p)?;
        positive("gamma_p_over_2pi_hz", self.gamma_p)?;
        positive("temperature", self.temperature)?;
        if !(self.quality_factor >= 1.0) {
            return Err(Error::param("quality_factor", "must be >= 1"));
        }
        if !(0.0 < self.theta_on && self.theta_on < self.theta_off && self.theta_off < TWO_PI) {
            return Err(Error::param(
                "theta_on",
                format!(
                    "need 0 < theta_on < theta_off < 2π, got {} and {}",
                    self.theta_on, self.theta_off
                ),
            ));
        }
        Ok(())
    }

    /// QPC fluctuation amplitude ζ, given directly or as 2√π (E_C/E_L)^¼.
    pub fn zeta(&self) -> f64 {
        match (self.zeta, self.ec_over_el) {
            (Some(z), _) => z,
            (None, Some(r)) => 2.0 * PI.sqrt() * r.powf(0.25),
            (None, None) => f64::NAN,
        }
    }

    /// Resonator phase fluctuation ξ = 2π S G u₀ / Φ₀.
    pub fn xi(&self) -> f64 {
        TWO_PI * self.loop_area * self.field_gradient * self.zero_point_amp / FLUX_QUANTUM
    }

    pub fn gamma_r(&self) -> f64 {
        self.rate_convention.rate_of(self.omega_r) / self.quality_factor
    }
}

/// Effective Fermi velocity of the wire.
///
/// With a = μW (the `chem_potential` angle) and d = Δ₀W/v, this is
/// v [cos a + (d/a) sin a] d²/(a² + d²). The a → 0 limit v(1 + d) is
/// taken analytically.
pub fn fermi_velocity(p: &DeviceParams) -> f64 {
    if let Some(v) = p.fermi_velocity_override {
        return v;
    }
    let a = p.chem_potential;
    let d = p.delta0 * p.wire_width / p.surface_velocity;
    if a.abs() < 1e-8 {
        // sin(a)/a = 1 - a²/6 + ...
        return p.surface_velocity * (1.0 + d * (1.0 - a * a / 6.0)) * d * d / (a * a + d * d);
    }
    p.surface_velocity * (a.cos() + d / a * a.sin()) * d * d / (a * a + d * d)
}

fn splitting_unchecked(theta: f64, p: &DeviceParams, v_f: f64) -> Result<f64> {
    let lambda = p.delta0 * p.wire_length / v_f * (0.5 * theta).sin();
    Ok(v_f / p.wire_length * reduced_splitting(lambda)?)
}

/// Qubit splitting E(θ) in rad/s.
pub fn qubit_splitting(theta: f64, p: &DeviceParams) -> Result<f64> {
    if !(0.0..=TWO_PI).contains(&theta) {
        return Err(Error::Domain(format!("theta must lie in [0, 2π], got {theta}")));
    }
    splitting_unchecked(theta, p, fermi_velocity(p))
}

pub const DERIVATIVE_STEP: f64 = 1e-6;

/// dE/dθ by a central difference with step 1e-6 rad and one Richardson
/// extrapolation.
pub fn splitting_derivative(theta: f64, p: &DeviceParams) -> Result<f64> {
    if !(0.0..=TWO_PI).contains(&theta) {
        return Err(Error::Domain(format!("theta must lie in [0, 2π], got {theta}")));
    }
    let v_f = fermi_velocity(p);
    let central = |h: f64| -> Result<f64> {
        Ok((splitting_unchecked(theta + h, p, v_f)? - splitting_unchecked(theta - h, p, v_f)?)
            / (2.0 * h))
    };
    let coarse = central(DERIVATIVE_STEP)?;
    let fine = central(0.5 * DERIVATIVE_STEP)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Probability factor for thermally exciting the wire's quasiparticle
/// modes, exp(-h v_F / (k_B T L)).
pub fn wire_excitation_factor(p: &DeviceParams) -> f64 {
    (-PLANCK * fermi_velocity(p) / (BOLTZMANN * p.temperature * p.wire_length)).exp()
}

/// Values taken from outside the closed-form chain. Any field left `None`
/// keeps the computed value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingOverrides {
    #[serde(
        rename = "omega_t_over_2pi_hz",
        with = "angular_hz::option",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub omega_t: Option<f64>,
    #[serde(
        rename = "g_over_2pi_hz",
        with = "angular_hz::option",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub g: Option<f64>,
    #[serde(
        rename = "g_prime_over_2pi_hz",
        with = "angular_hz::option",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub g_prime: Option<f64>,
    /// Resonator damping in s⁻¹.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_r: Option<f64>,
}

impl CouplingOverrides {
    /// Coupling values of the numerical fidelity study: ω_t = 1(2π) GHz,
    /// g = -20(2π) MHz, g' = -100(2π) MHz.
    pub fn simulation() -> Self {
        Self {
            omega_t: Some(TWO_PI * 1e9),
            g: Some(TWO_PI * -20e6),
            g_prime: Some(TWO_PI * -100e6),
            gamma_r: None,
        }
    }
}

/// Every rate and coupling entering the master equations, in rad/s or s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedCouplings {
    pub theta: f64,
    pub fermi_velocity: f64,
    pub omega_t: f64,
    pub omega_r: f64,
    pub omega_p: f64,
    pub gamma_p: f64,
    pub g: f64,
    pub g_prime: f64,
    pub xi: f64,
    pub zeta: f64,
    pub n_p: f64,
    pub n_r: f64,
    pub delta_shift: f64,
    pub gamma_big_p: f64,
    pub gamma_r: f64,
    pub gamma_w: f64,
    pub rate_convention: RateConvention,
}

impl DerivedCouplings {
    /// Induced qubit rate Γ_p = 2γ_p² ω_t g'² / ω_p⁴.
    pub fn induced_rate(gamma_p: f64, omega_t: f64, g_prime: f64, omega_p: f64) -> f64 {
        2.0 * gamma_p * gamma_p * omega_t * g_prime * g_prime / omega_p.powi(4)
    }

    /// Shift Δ = γ_p g'² / (2ω_p²).
    pub fn shift(gamma_p: f64, g_prime: f64, omega_p: f64) -> f64 {
        gamma_p * g_prime * g_prime / (2.0 * omega_p * omega_p)
    }

    /// Recomputes every quantity that depends on an overridden input.
    pub fn with_overrides(mut self, o: &CouplingOverrides) -> Self {
        if let Some(w) = o.omega_t {
            self.omega_t = w;
        }
        if let Some(g) = o.g {
            self.g = g;
        }
        if let Some(gp) = o.g_prime {
            self.g_prime = gp;
        }
        if let Some(gr) = o.gamma_r {
            self.gamma_r = gr;
        }
        self.refresh();
        self
    }

    /// Re-derives Δ and Γ_p from the current g', ω_t, ω_p, γ_p.
    pub fn refresh(&mut self) {
        self.delta_shift = Self::shift(self.gamma_p, self.g_prime, self.omega_p);
        self.gamma_big_p =
            Self::induced_rate(self.gamma_p, self.omega_t, self.g_prime, self.omega_p);
    }

    /// Copy with every dissipative channel switched off.
    pub fn closed(mut self) -> Self {
        self.gamma_p = 0.0;
        self.gamma_r = 0.0;
        self.n_p = 0.0;
        self.n_r = 0.0;
        self.refresh();
        self
    }

    /// Rate ratio of the upward and downward induced qubit channels.
    pub fn detailed_balance(&self) -> f64 {
        self.n_p / (self.n_p + 1.0)
    }
}

/// Couplings at the on-point θ_on.
pub fn couplings(p: &DeviceParams) -> Result<DerivedCouplings> {
    couplings_at(p, p.theta_on)
}

/// Couplings with the qubit biased at `theta`.
pub fn couplings_at(p: &DeviceParams, theta: f64) -> Result<DerivedCouplings> {
    p.validate()?;
    let omega_t = qubit_splitting(theta, p)?;
    let slope = splitting_derivative(theta, p)?;
    let xi = p.xi();
    let zeta = p.zeta();
    let g_prime = zeta / SQRT_2 * slope;
    Ok(DerivedCouplings {
        theta,
        fermi_velocity: fermi_velocity(p),
        omega_t,
        omega_r: p.omega_r,
        omega_p: p.omega_p,
        gamma_p: p.gamma_p,
        g: xi / SQRT_2 * slope,
        g_prime,
        xi,
        zeta,
        n_p: bose_occupation(p.omega_p, p.temperature),
        n_r: bose_occupation(p.omega_r, p.temperature),
        delta_shift: DerivedCouplings::shift(p.gamma_p, g_prime, p.omega_p),
        gamma_big_p: DerivedCouplings::induced_rate(p.gamma_p, omega_t, g_prime, p.omega_p),
        gamma_r: p.gamma_r(),
        gamma_w: wire_excitation_factor(p),
        rate_convention: p.rate_convention,
    })
}
