//! State transfer, entanglement, √SWAP and controlled-phase protocols.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::device::DerivedCouplings;
use crate::dynamics::{
    build_effective, build_full, integrate, propagate_ket, IntegratorOptions, LiouvillianSpec,
    Model, Part, Probe, ProbeKind, SimulationResult,
};
use crate::error::{Error, Result};
use crate::gates::{cz_gate, makhlin, swap_gate, unitarity_residual, Gate, MakhlinInvariants};
use crate::ops::{c, qubit_ops, CVector, DensityMatrix, HilbertSpec};
use crate::pulse::{PulseSchedule, PulseShape};
use crate::units::TWO_PI;

pub const STATE_TRANSFER_AREA: f64 = -PI;
pub const ENTANGLE_AREA: f64 = -PI / 2.0;
pub const SQRT_SWAP_AREA: f64 = -1.5 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolName {
    StateTransfer,
    Entangle,
    SqrtSwap,
    CpGate,
    Sensitivity,
}

impl ProtocolName {
    pub const ALL: [ProtocolName; 5] = [
        ProtocolName::StateTransfer,
        ProtocolName::Entangle,
        ProtocolName::SqrtSwap,
        ProtocolName::CpGate,
        ProtocolName::Sensitivity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolName::StateTransfer => "state-transfer",
            ProtocolName::Entangle => "entangle",
            ProtocolName::SqrtSwap => "sqrt-swap",
            ProtocolName::CpGate => "cp-gate",
            ProtocolName::Sensitivity => "sensitivity",
        }
    }

    /// True for protocols whose output is a two-qubit gate rather than a
    /// state trajectory.
    pub fn is_gate(self) -> bool {
        matches!(self, ProtocolName::CpGate)
    }
}

impl fmt::Display for ProtocolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown protocol `{s}`")))
    }
}

/// Pure state of qubit ⊗ resonator as a list of (qubit, fock, amplitude).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ket(pub Vec<(usize, usize, Complex64)>);

impl Ket {
    pub fn basis(qubit: usize, fock: usize) -> Self {
        Ket(vec![(qubit, fock, c(1.0, 0.0))])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|(_, _, a)| a.norm_sqr()).sum()
    }

    /// Vector on the first two factors of `space`, all further factors in
    /// their ground state.
    pub fn on(&self, space: &HilbertSpec) -> Result<CVector> {
        let mut v = CVector::zeros(space.dim());
        let extra = space.num_factors().saturating_sub(2);
        for &(q, n, amp) in &self.0 {
            let mut labels = vec![q, n];
            labels.extend(std::iter::repeat_n(0, extra));
            v[space.index(&labels)?] += amp;
        }
        Ok(v)
    }

    /// Vector on qubit ⊗ resonator truncated at `n_fock`.
    pub fn reduced(&self, n_fock: usize) -> Result<CVector> {
        self.on(&HilbertSpec::qubit_resonator(n_fock)?)
    }
}

/// Image of μ|↓0⟩ + ν|↑0⟩ under a closed exchange pulse of signed area A:
/// μ|↓0⟩ + ν(cos(A/2)|↑0⟩ + i sin(A/2)|↓1⟩).
pub fn exchange_target(mu: Complex64, nu: Complex64, area: f64) -> Ket {
    let (s, co) = (0.5 * area).sin_cos();
    Ket(vec![
        (0, 0, mu),
        (1, 0, nu * co),
        (0, 1, nu * c(0.0, s)),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub name: ProtocolName,
    pub initial: Ket,
    pub pulse_area: f64,
    pub target: Ket,
    pub model: Model,
}

impl ProtocolSpec {
    pub fn state_transfer(mu: Complex64, nu: Complex64, model: Model) -> Result<Self> {
        let norm = mu.norm_sqr() + nu.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::param("mu, nu", format!("|mu|^2 + |nu|^2 = {norm}, expected 1")));
        }
        Ok(Self {
            name: ProtocolName::StateTransfer,
            initial: Ket(vec![(0, 0, mu), (1, 0, nu)]),
            pulse_area: STATE_TRANSFER_AREA,
            target: exchange_target(mu, nu, STATE_TRANSFER_AREA),
            model,
        })
    }

    pub fn entangle(model: Model) -> Self {
        let one = c(1.0, 0.0);
        Self {
            name: ProtocolName::Entangle,
            initial: Ket::basis(1, 0),
            pulse_area: ENTANGLE_AREA,
            target: exchange_target(c(0.0, 0.0), one, ENTANGLE_AREA),
            model,
        }
    }

    /// |↑0⟩ under the √SWAP pulse.
    pub fn sqrt_swap(model: Model) -> Self {
        Self {
            name: ProtocolName::SqrtSwap,
            initial: Ket::basis(1, 0),
            pulse_area: SQRT_SWAP_AREA,
            target: exchange_target(c(0.0, 0.0), c(1.0, 0.0), SQRT_SWAP_AREA),
            model,
        }
    }

    /// Equal-weight state transfer.
    pub fn default_transfer(model: Model) -> Self {
        let h = c(FRAC_1_SQRT_2, 0.0);
        Self::state_transfer(h, h, model).expect("normalized")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Truncation {
    pub n_fock: usize,
    pub m_fock: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            n_fock: 10,
            m_fock: 5,
        }
    }
}

/// Labels and (row, col) indices of the tracked density-matrix elements,
/// with 0 = |↓0⟩, 1 = |↓1⟩, 2 = |↑0⟩.
pub const TRACKED_ELEMENTS: [(&str, usize, usize); 6] = [
    ("rho_s00", 0, 0),
    ("rho_s01", 0, 1),
    ("rho_s02", 0, 2),
    ("rho_s11", 1, 1),
    ("rho_s12", 1, 2),
    ("rho_s22", 2, 2),
];

const TRACKED_STATES: [(usize, usize); 3] = [(0, 0), (0, 1), (1, 0)];

/// Everything needed to run a protocol: couplings, truncation, pulse
/// shape and the static perturbations used by the sensitivity study.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub couplings: DerivedCouplings,
    pub truncation: Truncation,
    pub pulse: PulseShape,
    pub sample_dt: f64,
    /// Extra qubit splitting δ, entering as (δ/2)σ_z.
    pub detuning: f64,
    /// Multiplies the pulse envelope; durations stay those of the
    /// unscaled pulse.
    pub coupling_scale: f64,
    pub resolution: f64,
    pub check_positivity: bool,
}

impl Simulator {
    pub fn new(couplings: DerivedCouplings) -> Self {
        Self {
            couplings,
            truncation: Truncation::default(),
            pulse: PulseShape::default(),
            sample_dt: 0.25e-9,
            detuning: 0.0,
            coupling_scale: 1.0,
            resolution: 50.0,
            check_positivity: true,
        }
    }

    /// Copy with all dissipation removed.
    pub fn closed(&self) -> Self {
        Self {
            couplings: self.couplings.closed(),
            ..self.clone()
        }
    }

    pub fn space(&self, model: Model) -> Result<HilbertSpec> {
        match model {
            Model::Effective => HilbertSpec::qubit_resonator(self.truncation.n_fock),
            Model::Full => {
                HilbertSpec::qubit_resonator_qpc(self.truncation.n_fock, self.truncation.m_fock)
            }
        }
    }

    pub fn liouvillian(&self, model: Model) -> Result<LiouvillianSpec> {
        let space = self.space(model)?;
        let l = match model {
            Model::Effective => build_effective(&self.couplings, &space)?,
            Model::Full => build_full(&self.couplings, &space)?,
        };
        if self.detuning != 0.0 {
            l.with_detuning(self.detuning)
        } else {
            Ok(l)
        }
    }

    pub fn schedule(&self, area: f64) -> Result<PulseSchedule> {
        if area == 0.0 {
            return Ok(PulseSchedule::empty());
        }
        let g = self.couplings.g;
        if g == 0.0 {
            return Err(Error::param("g", "pulse needs a nonzero coupling"));
        }
        if area.signum() != g.signum() {
            return Err(Error::param(
                "pulse_area",
                format!("area {area} has the opposite sign to g = {g}"),
            ));
        }
        let s = PulseSchedule::build(self.pulse, area, g)?;
        Ok(if self.coupling_scale != 1.0 {
            s.scaled(self.coupling_scale)
        } else {
            s
        })
    }

    fn probes(&self, spec: &ProtocolSpec) -> Result<Vec<Probe>> {
        let n = self.truncation.n_fock;
        let keep = vec![0, 1];
        let idx = |k: usize| TRACKED_STATES[k].0 * n + TRACKED_STATES[k].1;
        let mut probes = Vec::new();
        for (name, r, col) in TRACKED_ELEMENTS {
            let element = |part| ProbeKind::Element {
                keep: keep.clone(),
                row: idx(r),
                col: idx(col),
                part,
            };
            if r == col {
                probes.push(Probe::new(name, element(Part::Re)));
            } else {
                probes.push(Probe::new(name, element(Part::Abs)));
                probes.push(Probe::new(format!("{name}_re"), element(Part::Re)));
                probes.push(Probe::new(format!("{name}_im"), element(Part::Im)));
            }
        }
        probes.push(Probe::new(
            "fidelity",
            ProbeKind::Fidelity {
                keep,
                target: spec.target.reduced(n)?,
            },
        ));
        Ok(probes)
    }

    pub fn run(&self, spec: &ProtocolSpec) -> Result<SimulationResult> {
        if (spec.initial.norm_sqr() - 1.0).abs() > 1e-12 {
            return Err(Error::param("initial", "state is not normalized"));
        }
        let l = self.liouvillian(spec.model)?;
        let psi0 = spec.initial.on(&l.space)?;
        let rho0 = DensityMatrix::pure(&l.space, &psi0)?;
        let schedule = self.schedule(spec.pulse_area)?;
        let opts = IntegratorOptions {
            resolution: self.resolution,
            probes: self.probes(spec)?,
            target: Some((vec![0, 1], spec.target.reduced(self.truncation.n_fock)?)),
            check_positivity: self.check_positivity,
            max_step: None,
        };
        integrate(&l, &rho0, &schedule, self.sample_dt, &opts)
    }

    pub fn run_state_transfer(
        &self,
        mu: Complex64,
        nu: Complex64,
        model: Model,
    ) -> Result<SimulationResult> {
        self.run(&ProtocolSpec::state_transfer(mu, nu, model)?)
    }

    pub fn run_entangle(&self, model: Model) -> Result<SimulationResult> {
        self.run(&ProtocolSpec::entangle(model))
    }

    /// Closed-system propagator on span{|↓0⟩, |↓1⟩, |↑0⟩, |↑1⟩}, with the
    /// resonator truncated to its two lowest levels.
    pub fn extract_unitary(&self, area: f64) -> Result<Gate> {
        let sim = Simulator {
            truncation: Truncation {
                n_fock: 2,
                ..self.truncation
            },
            ..self.closed()
        };
        let l = sim.liouvillian(Model::Effective)?;
        let schedule = sim.schedule(area)?;
        let mut u = Gate::zeros();
        for j in 0..4 {
            let psi0 = l.space.basis_ket(&[j / 2, j % 2])?;
            let psi = propagate_ket(&l, &psi0, &schedule, sim.resolution)?;
            for i in 0..4 {
                u[(i, j)] = psi[i];
            }
        }
        Ok(u)
    }

    /// R_{z,t}(90) R_{z,r}(-90) √SWAP R_{z,t}(180) √SWAP.
    pub fn controlled_phase(&self) -> Result<GateReport> {
        let s = self.extract_unitary(SQRT_SWAP_AREA)?;
        let cp = compose_controlled_phase(&s);
        Ok(GateReport::new(&s, &cp))
    }

    /// Copy with the qubit splitting and g both off by `pct` percent. The
    /// splitting error p·E/h is taken in the frequency units in which E is
    /// quoted and applied as a detuning in rad/s.
    pub fn perturbed(&self, pct: f64) -> Self {
        let p = pct / 100.0;
        Simulator {
            detuning: self.detuning + p * self.couplings.omega_t / TWO_PI,
            coupling_scale: self.coupling_scale * (1.0 + p),
            ..self.clone()
        }
    }

    /// Equal-weight state-transfer fidelity under [`Simulator::perturbed`].
    pub fn sensitivity(&self, pct: f64, model: Model) -> Result<f64> {
        self.perturbed(pct)
            .run(&ProtocolSpec::default_transfer(model))?
            .fidelity
            .ok_or_else(|| Error::Convergence("no fidelity recorded".into()))
    }

    /// Qubit decay in the full model with the resonator removed: the
    /// qubit starts in the controller-dressed excited state and ln P_↑ is
    /// fitted over `duration`.
    pub fn decay_rate(&self, duration: f64, samples: usize) -> Result<DecayFit> {
        let space = HilbertSpec::new(vec![2, 1, self.truncation.m_fock])?;
        let dc = DerivedCouplings {
            g: 0.0,
            ..self.couplings
        };
        let l = build_full(&dc, &space)?;
        let h = &l.static_hamiltonian.matrix;
        let eig = h.clone().symmetric_eigen();
        let up = space.index(&[1, 0, 0])?;
        let k = (0..space.dim())
            .max_by(|&a, &b| {
                eig.eigenvectors[(up, a)]
                    .norm()
                    .total_cmp(&eig.eigenvectors[(up, b)].norm())
            })
            .expect("nonempty");
        let psi0: CVector = eig.eigenvectors.column(k).into_owned();
        let psi0 = &psi0 / c(psi0.norm(), 0.0);
        let rho0 = DensityMatrix::pure(&space, &psi0)?;
        let q = qubit_ops(&space)?;
        let p_up = q.sigma_plus.mul(&q.sigma_minus).matrix;
        let opts = IntegratorOptions {
            resolution: self.resolution,
            probes: vec![Probe::new("p_up", ProbeKind::Expectation(p_up))],
            check_positivity: self.check_positivity,
            ..Default::default()
        };
        let dt = duration / samples.max(1) as f64;
        let r = integrate(&l, &rho0, &PulseSchedule::idle(duration)?, dt, &opts)?;
        let p = r.trace("p_up").expect("probe");
        let ys: Vec<f64> = p.iter().map(|v| v.ln()).collect();
        let rate = -least_squares_slope(&r.times, &ys);
        let dc = &self.couplings;
        let detuning = dc.omega_p - dc.omega_t;
        let purcell = 0.25 * dc.g_prime * dc.g_prime * dc.gamma_p * (dc.n_p + 1.0)
            / (detuning * detuning + 0.25 * dc.gamma_p * dc.gamma_p);
        Ok(DecayFit {
            rate,
            effective: dc.gamma_big_p * (dc.n_p + 1.0),
            purcell,
            duration,
        })
    }
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Fitted decay rate of P_↑, s⁻¹.
    pub rate: f64,
    /// Γ_p(N_p+1) of the effective model.
    pub effective: f64,
    /// (g'/2)² γ_p(N_p+1) / ((ω_p-ω_t)² + γ_p²/4).
    pub purcell: f64,
    pub duration: f64,
}

/// diag(e^{-iφ/2}, e^{iφ/2}) on the lower/upper level.
fn rz2(deg: f64) -> Matrix2<Complex64> {
    let half = 0.5 * deg.to_radians();
    Matrix2::new(
        Complex64::from_polar(1.0, -half),
        c(0.0, 0.0),
        c(0.0, 0.0),
        Complex64::from_polar(1.0, half),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    /// The topological qubit, levels {↓, ↑}.
    T,
    /// The resonator, Fock levels {0, 1}.
    R,
}

/// Ideal z rotation by `deg` degrees on one subsystem of the gate basis.
pub fn rz(subsystem: Subsystem, deg: f64) -> Gate {
    let id = Matrix2::<Complex64>::identity();
    let k = match subsystem {
        Subsystem::T => rz2(deg).kronecker(&id),
        Subsystem::R => id.kronecker(&rz2(deg)),
    };
    Gate::from_fn(|i, j| k[(i, j)])
}

pub fn compose_controlled_phase(sqrt_swap: &Gate) -> Gate {
    rz(Subsystem::T, 90.0) * rz(Subsystem::R, -90.0) * sqrt_swap * rz(Subsystem::T, 180.0) * sqrt_swap
}

#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    pub sqrt_swap: [[Complex64; 4]; 4],
    pub sqrt_swap_unitarity: f64,
    pub sqrt_swap_squared: MakhlinInvariants,
    pub swap_reference: MakhlinInvariants,
    pub sqrt_swap_squared_distance: f64,
    pub cp: [[Complex64; 4]; 4],
    pub cp_unitarity: f64,
    pub cp_invariants: MakhlinInvariants,
    pub cz_reference: MakhlinInvariants,
    pub cp_distance: f64,
}

fn rows(g: &Gate) -> [[Complex64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| g[(i, j)]))
}

impl GateReport {
    pub fn new(sqrt_swap: &Gate, cp: &Gate) -> Self {
        let sq = makhlin(&(sqrt_swap * sqrt_swap));
        let sw = makhlin(&swap_gate());
        let ci = makhlin(cp);
        let cz = makhlin(&cz_gate());
        Self {
            sqrt_swap: rows(sqrt_swap),
            sqrt_swap_unitarity: unitarity_residual(sqrt_swap),
            sqrt_swap_squared: sq,
            swap_reference: sw,
            sqrt_swap_squared_distance: sq.distance(&sw),
            cp: rows(cp),
            cp_unitarity: unitarity_residual(cp),
            cp_invariants: ci,
            cz_reference: cz,
            cp_distance: ci.distance(&cz),
        }
    }

    pub fn squares_to_swap(&self, tol: f64) -> bool {
        self.sqrt_swap_squared_distance < tol
    }

    pub fn cz_equivalent(&self, tol: f64) -> bool {
        self.cp_distance < tol
    }

    pub fn unitary(&self, tol: f64) -> bool {
        self.sqrt_swap_unitarity < tol && self.cp_unitarity < tol
    }
}
