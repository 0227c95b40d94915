//! Master-equation assembly and time integration.
//!
//! Both models run in the frame rotating at ω_t for the qubit and the
//! resonator, at exact resonance ω_r = ω_t, so the pulse envelope g(t)
//! carries all explicit time dependence.

mod integrate;
mod sparse;

pub use integrate::{
    integrate, propagate_ket, IntegratorOptions, Part, Probe, ProbeKind, SimulationResult, Trace,
};

use serde::{Deserialize, Serialize};

use crate::device::DerivedCouplings;
use crate::error::{Error, Result};
use crate::ops::{c, ladder, qubit_ops, HilbertSpec, Operator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Qubit ⊗ resonator with the phase controller eliminated.
    #[default]
    Effective,
    /// Qubit ⊗ resonator ⊗ phase-controller mode.
    Full,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "effective" => Ok(Model::Effective),
            "full" => Ok(Model::Full),
            other => Err(Error::Config(format!(
                "unknown model `{other}` (expected `effective` or `full`)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dissipator {
    pub label: String,
    pub collapse: Operator,
    pub rate: f64,
}

/// H(t) = static_hamiltonian + g(t) · drive_coupling, plus Lindblad
/// dissipators Σ rate · D[collapse] with D[c]ρ = cρc† - ½{c†c, ρ}.
#[derive(Debug, Clone)]
pub struct LiouvillianSpec {
    pub space: HilbertSpec,
    pub static_hamiltonian: Operator,
    pub drive_coupling: Operator,
    pub dissipators: Vec<Dissipator>,
}

impl LiouvillianSpec {
    pub fn validate(&self) -> Result<()> {
        for op in [&self.static_hamiltonian, &self.drive_coupling] {
            if op.space != self.space {
                return Err(Error::Dimension("Hamiltonian term on a different space".into()));
            }
        }
        for d in &self.dissipators {
            if d.collapse.space != self.space {
                return Err(Error::Dimension(format!("dissipator `{}` on a different space", d.label)));
            }
            if !(d.rate >= 0.0 && d.rate.is_finite()) {
                return Err(Error::param(&d.label, format!("rate must be >= 0, got {}", d.rate)));
            }
        }
        Ok(())
    }

    /// Adds a static (δ/2)σ_z term.
    pub fn with_detuning(mut self, detuning: f64) -> Result<Self> {
        if detuning != 0.0 {
            let q = qubit_ops(&self.space)?;
            self.static_hamiltonian = self
                .static_hamiltonian
                .add(&q.sigma_z.scale(c(0.5 * detuning, 0.0)));
        }
        Ok(self)
    }

    /// Same Hamiltonian with every dissipator removed.
    pub fn closed(&self) -> Self {
        Self {
            dissipators: Vec::new(),
            ..self.clone()
        }
    }

    pub fn rate(&self, label: &str) -> Option<f64> {
        self.dissipators.iter().find(|d| d.label == label).map(|d| d.rate)
    }
}

/// -½(a†σ⁻ + aσ⁺) on factors 0 (qubit) and 1 (resonator).
fn exchange_coupling(space: &HilbertSpec) -> Result<Operator> {
    let q = qubit_ops(space)?;
    let a = ladder(space, 1)?;
    Ok(a.adjoint()
        .mul(&q.sigma_minus)
        .add(&a.mul(&q.sigma_plus))
        .scale(c(-0.5, 0.0)))
}

fn push(out: &mut Vec<Dissipator>, label: &str, collapse: Operator, rate: f64) {
    out.push(Dissipator {
        label: label.to_string(),
        collapse,
        rate,
    });
}

/// Effective qubit–resonator master equation: Jaynes–Cummings exchange,
/// the (Δ/2)σ_z shift, induced qubit rates Γ_p(N_p+1), Γ_p N_p and
/// resonator rates γ_r(N_r+1), γ_r N_r.
pub fn build_effective(dc: &DerivedCouplings, space: &HilbertSpec) -> Result<LiouvillianSpec> {
    if space.num_factors() != 2 {
        return Err(Error::Dimension("effective model needs [qubit, resonator]".into()));
    }
    let q = qubit_ops(space)?;
    let a = ladder(space, 1)?;
    let mut dissipators = Vec::new();
    push(&mut dissipators, "qubit_down", q.sigma_minus.clone(), dc.gamma_big_p * (dc.n_p + 1.0));
    push(&mut dissipators, "qubit_up", q.sigma_plus.clone(), dc.gamma_big_p * dc.n_p);
    push(&mut dissipators, "resonator_down", a.clone(), dc.gamma_r * (dc.n_r + 1.0));
    push(&mut dissipators, "resonator_up", a.adjoint(), dc.gamma_r * dc.n_r);
    let spec = LiouvillianSpec {
        space: space.clone(),
        static_hamiltonian: q.sigma_z.scale(c(0.5 * dc.delta_shift, 0.0)),
        drive_coupling: exchange_coupling(space)?,
        dissipators,
    };
    spec.validate()?;
    Ok(spec)
}

/// Qubit–resonator–controller model: the controller mode sits at the
/// static detuning ω_p - ω_t, exchanges with the qubit via
/// -½g'(bσ⁺ + b†σ⁻), and is damped at γ_p(N_p+1), γ_p N_p.
pub fn build_full(dc: &DerivedCouplings, space: &HilbertSpec) -> Result<LiouvillianSpec> {
    if space.num_factors() != 3 {
        return Err(Error::Dimension(
            "full model needs [qubit, resonator, controller]".into(),
        ));
    }
    let q = qubit_ops(space)?;
    let b = ladder(space, 2)?;
    let number_b = b.adjoint().mul(&b);
    let exchange_b = b
        .mul(&q.sigma_plus)
        .add(&b.adjoint().mul(&q.sigma_minus))
        .scale(c(-0.5 * dc.g_prime, 0.0));
    let static_h = number_b
        .scale(c(dc.omega_p - dc.omega_t, 0.0))
        .add(&exchange_b);
    // a one-level resonator factor switches the resonator off entirely
    let mut dissipators = Vec::new();
    let drive = if space.dims()[1] >= 2 {
        let a = ladder(space, 1)?;
        push(&mut dissipators, "resonator_down", a.clone(), dc.gamma_r * (dc.n_r + 1.0));
        push(&mut dissipators, "resonator_up", a.adjoint(), dc.gamma_r * dc.n_r);
        exchange_coupling(space)?
    } else {
        Operator::zeros(space)
    };
    push(&mut dissipators, "controller_down", b.clone(), dc.gamma_p * (dc.n_p + 1.0));
    push(&mut dissipators, "controller_up", b.adjoint(), dc.gamma_p * dc.n_p);
    let spec = LiouvillianSpec {
        space: space.clone(),
        static_hamiltonian: static_h,
        drive_coupling: drive,
        dissipators,
    };
    spec.validate()?;
    Ok(spec)
}
