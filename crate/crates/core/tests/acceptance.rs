//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use hybridsim::config::{ExperimentConfig, SweepAxis, SweepConfig};
use hybridsim::correlations::{correlation_j, correlation_k, QpcMode};
use hybridsim::device::{couplings_at, wire_excitation_factor, DeviceParams};
use hybridsim::dynamics::{
    build_effective, integrate, IntegratorOptions, Model, Probe, ProbeKind, SimulationResult,
};
use hybridsim::gates::{cz_gate, makhlin, swap_gate, unitarity_residual};
use hybridsim::ops::{c, ladder, qubit_ops, DensityMatrix};
use hybridsim::protocols::{
    compose_controlled_phase, ProtocolSpec, Simulator, Truncation, SQRT_SWAP_AREA,
};
use hybridsim::pulse::{PulseSchedule, PulseShape};
use hybridsim::sweep::{linspace, run_sweep, Execution};
use hybridsim::units::{angular, bose_occupation, TWO_PI};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(checks: &[(bool, String)]) -> Outcome {
    Outcome {
        pass: checks.iter().all(|(p, _)| *p),
        detail: checks
            .iter()
            .map(|(p, s)| format!("{}{s}", if *p { "" } else { "[x] " }))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn simulator() -> Simulator {
    ExperimentConfig::simulation().simulator().expect("simulation config")
}

fn h() -> Complex64 {
    c(FRAC_1_SQRT_2, 0.0)
}

fn fidelity(r: &SimulationResult) -> f64 {
    r.fidelity.expect("target set")
}

/// Largest invariant residuals over a set of runs.
#[derive(Default, Clone, Copy)]
struct Residuals {
    drift: f64,
    herm: f64,
    min_eig: f64,
    runs: usize,
}

impl Residuals {
    fn add(&mut self, r: &SimulationResult) {
        if self.runs == 0 {
            self.min_eig = f64::INFINITY;
        }
        self.drift = self.drift.max(r.max_trace_drift);
        self.herm = self.herm.max(r.max_hermiticity);
        self.min_eig = self.min_eig.min(r.min_eigenvalue);
        self.runs += 1;
    }
}

fn criterion_1(res: &mut Residuals) -> Outcome {
    let sim = simulator();
    let t0 = Instant::now();
    let r1 = sim.run_state_transfer(h(), h(), Model::Effective).unwrap();
    let t1 = t0.elapsed().as_secs_f64();
    let t0 = Instant::now();
    let r2 = sim.run_entangle(Model::Effective).unwrap();
    let t2 = t0.elapsed().as_secs_f64();
    res.add(&r1);
    res.add(&r2);
    let (f1, f2) = (fidelity(&r1), fidelity(&r2));
    outcome(&[
        ((f1 - 0.990).abs() <= 0.005, format!("F1 = {f1:.5} (0.990 +/- 0.005)")),
        ((f2 - 0.993).abs() <= 0.005, format!("F2 = {f2:.5} (0.993 +/- 0.005)")),
        (t1 < 10.0 && t2 < 10.0, format!("runtime {t1:.3} s / {t2:.3} s (< 10 s)")),
    ])
}

fn criterion_2(res: &mut Residuals) -> Outcome {
    let sim = simulator().closed();
    let r1 = sim.run_state_transfer(h(), h(), Model::Effective).unwrap();
    let r2 = sim.run_entangle(Model::Effective).unwrap();
    res.add(&r1);
    res.add(&r2);
    let (e1, e2) = (1.0 - fidelity(&r1), 1.0 - fidelity(&r2));

    // locate the first full transfer |↑0⟩ -> |↓1⟩ under a constant coupling
    let square = Simulator {
        pulse: PulseShape::Square,
        sample_dt: 10e-12,
        ..sim.clone()
    };
    let g = square.couplings.g;
    let expected = PI / g.abs();
    let sched = square.schedule(-2.0 * PI).unwrap();
    let r = square
        .run(&ProtocolSpec {
            pulse_area: -2.0 * PI,
            ..ProtocolSpec::entangle(Model::Effective)
        })
        .unwrap();
    res.add(&r);
    let p = r.trace("rho_s11").unwrap();
    let k = (1..p.len() - 1)
        .max_by(|&a, &b| p[a].total_cmp(&p[b]))
        .unwrap();
    let dt = r.times[k + 1] - r.times[k];
    let (ym, y0, yp) = (p[k - 1], p[k], p[k + 1]);
    let t_peak = r.times[k] + 0.5 * dt * (ym - yp) / (ym - 2.0 * y0 + yp);
    let pi_square = square.schedule(-PI).unwrap().duration();
    outcome(&[
        (e1 < 1e-6, format!("1-F1 = {e1:.2e}")),
        (e2 < 1e-6, format!("1-F2 = {e2:.2e}")),
        (
            (pi_square - expected).abs() < 1e-15 && (t_peak - expected).abs() < 1e-12,
            format!(
                "pi pulse {:.6} ns, transfer peak {:.6} ns, pi/|g| = {:.6} ns, 2pi schedule {:.3} ns",
                pi_square * 1e9,
                t_peak * 1e9,
                expected * 1e9,
                sched.duration() * 1e9
            ),
        ),
    ])
}

fn criterion_3(res: &mut Residuals) -> Outcome {
    let sim = simulator();
    let eff = sim.run_state_transfer(h(), h(), Model::Effective).unwrap();
    let t0 = Instant::now();
    let full = sim.run_state_transfer(h(), h(), Model::Full).unwrap();
    let t_full = t0.elapsed().as_secs_f64();
    res.add(&eff);
    res.add(&full);
    let (fe, ff) = (fidelity(&eff), fidelity(&full));
    let fit = sim.decay_rate(200e-9, 200).unwrap();
    let rel = (fit.rate - fit.effective).abs() / fit.effective;
    let rel_purcell = (fit.rate - fit.purcell).abs() / fit.purcell;
    outcome(&[
        (
            (fe - ff).abs() < 0.01,
            format!(
                "F1 effective {fe:.5} vs full {ff:.5} (|diff| = {:.2e}, full run {t_full:.1} s)",
                (fe - ff).abs()
            ),
        ),
        (
            rel <= 0.2,
            format!(
                "full-model decay {:.4e} /s vs Gamma_p(N_p+1) = {:.4e} /s (rel. err {rel:.2e}); \
                 regression-theorem rate {:.4e} /s (rel. err {rel_purcell:.2e})",
                fit.rate, fit.effective, fit.purcell
            ),
        ),
    ])
}

/// ∫₀^∞ f(τ) dτ for an exponentially damped oscillatory integrand:
/// 8-point Gauss–Legendre on panels of a quarter period, out to `tmax`.
fn oscillatory_quadrature(f: impl Fn(f64) -> Complex64, period: f64, tmax: f64) -> Complex64 {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let panel = 0.25 * period;
    let n = (tmax / panel).ceil() as usize;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let mid = (k as f64 + 0.5) * panel;
        let half = 0.5 * panel;
        for (x, w) in X.iter().zip(W) {
            sum += (f(mid - half * x) + f(mid + half * x)) * (w * half);
        }
    }
    sum
}

fn criterion_4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20_26);
    let mut worst_j: f64 = 0.0;
    let mut worst_k: f64 = 0.0;
    let mut worst_quad: f64 = 0.0;
    for _ in 0..20 {
        let omega_t = angular(rng.random_range(0.5e9..2.0e9));
        let omega_p = angular(rng.random_range(3.0e9..6.0e9));
        let gamma_p = angular(rng.random_range(0.5e6..50e6));
        let temperature = rng.random_range(0.01..0.2);
        let m = QpcMode {
            omega_p,
            gamma_p,
            n_p: bose_occupation(omega_p, temperature),
        };
        let tmax = 60.0 / gamma_p;
        let period = TWO_PI / (omega_p + omega_t);
        // ⟨b(τ)b†(0)⟩ = (N_p+1) e^{-iω_pτ - γ_pτ/2}, ⟨b†(τ)b(0)⟩ = N_p e^{iω_pτ - γ_pτ/2}
        let jq = oscillatory_quadrature(
            |t| (m.n_p + 1.0) * Complex64::from_polar((-0.5 * gamma_p * t).exp(), (omega_t - omega_p) * t),
            period,
            tmax,
        );
        let kq = oscillatory_quadrature(
            |t| m.n_p * Complex64::from_polar((-0.5 * gamma_p * t).exp(), (omega_p - omega_t) * t),
            period,
            tmax,
        );
        // the same integrals in closed form bound the quadrature error
        let j_exact = (m.n_p + 1.0) / Complex64::new(0.5 * gamma_p, omega_p - omega_t);
        worst_quad = worst_quad.max((jq - j_exact).norm() / j_exact.norm());
        worst_j = worst_j.max((correlation_j(omega_t, &m) - jq).norm() / jq.norm());
        worst_k = worst_k.max((correlation_k(omega_t, &m) - kq).norm() / kq.norm());
    }
    outcome(&[
        (worst_j < 1e-6, format!("max rel. err J = {worst_j:.3e}")),
        (worst_k < 1e-6, format!("max rel. err K = {worst_k:.3e}")),
        (worst_quad < 1e-9, format!("quadrature self-check {worst_quad:.1e}")),
    ])
}

fn criterion_5(res: &Residuals) -> Outcome {
    // thermal fixed point: coupling and qubit channels off
    let mut dc = simulator().couplings;
    dc.g = 0.0;
    dc.gamma_big_p = 0.0;
    let space = hybridsim::ops::HilbertSpec::qubit_resonator(10).unwrap();
    let l = build_effective(&dc, &space).unwrap();
    let a = ladder(&space, 1).unwrap();
    let n_op = a.adjoint().mul(&a);
    let t_end = 10.0 / dc.gamma_r;
    let rho0 = DensityMatrix::pure(&space, &space.basis_ket(&[0, 0]).unwrap()).unwrap();
    let opts = IntegratorOptions {
        probes: vec![Probe::new("n", ProbeKind::Expectation(n_op.matrix.clone()))],
        ..Default::default()
    };
    let thermal = integrate(&l, &rho0, &PulseSchedule::idle(t_end).unwrap(), t_end / 100.0, &opts).unwrap();
    let n_final = *thermal.trace("n").unwrap().last().unwrap();
    let thermal_err = (n_final - dc.n_r).abs();

    // excitation number in a closed run
    let sim = simulator().closed();
    let l = sim.liouvillian(Model::Effective).unwrap();
    let q = qubit_ops(&l.space).unwrap();
    let a = ladder(&l.space, 1).unwrap();
    let number = a.adjoint().mul(&a).add(&q.sigma_plus.mul(&q.sigma_minus));
    let psi = ProtocolSpec::default_transfer(Model::Effective).initial.on(&l.space).unwrap();
    let opts = IntegratorOptions {
        probes: vec![Probe::new("n_exc", ProbeKind::Expectation(number.matrix))],
        ..Default::default()
    };
    let closed = integrate(
        &l,
        &DensityMatrix::pure(&l.space, &psi).unwrap(),
        &sim.schedule(-PI).unwrap(),
        sim.sample_dt,
        &opts,
    )
    .unwrap();
    let n = closed.trace("n_exc").unwrap();
    let exc_drift = n.iter().map(|v| (v - n[0]).abs()).fold(0.0, f64::max);

    let mut all = *res;
    all.add(&thermal);
    all.add(&closed);
    outcome(&[
        (all.drift < 1e-8, format!("trace drift {:.1e}", all.drift)),
        (all.herm < 1e-9, format!("hermiticity {:.1e}", all.herm)),
        (all.min_eig >= -1e-7, format!("min eigenvalue {:.1e}", all.min_eig)),
        (
            thermal_err < 1e-4,
            format!("<a+a> = {n_final:.6} vs N_r = {:.6} after 10/gamma_r", dc.n_r),
        ),
        (exc_drift < 1e-8, format!("excitation drift {exc_drift:.1e} ({} runs)", all.runs)),
    ])
}

fn criterion_6() -> Outcome {
    let sim = simulator();
    let base = sim.sensitivity(0.0, Model::Effective).unwrap();
    let f = sim.sensitivity(1.0, Model::Effective).unwrap();
    outcome(&[(
        (0.975..=0.990).contains(&f),
        format!("F1 {base:.5} -> {f:.5} at 1% (window [0.975, 0.990])"),
    )])
}

fn criterion_7() -> Outcome {
    let p = DeviceParams::calibrated();
    let on = couplings_at(&p, p.theta_on).unwrap();
    let off = couplings_at(&p, p.theta_off).unwrap();
    let g_target = TWO_PI * -20e6;
    let gp_target = TWO_PI * -100e6;
    let g_rel = (on.g - g_target).abs() / g_target.abs();
    let gp_rel = (on.g_prime - gp_target).abs() / gp_target.abs();
    let supp_g = (off.g / on.g).abs();
    let supp_gp = (off.g_prime / on.g_prime).abs();
    let cold = DeviceParams {
        temperature: 20e-3,
        ..p.clone()
    };
    let gw = wire_excitation_factor(&cold);
    outcome(&[
        (on.xi > 0.002, format!("xi = {:.3e}", on.xi)),
        (g_rel < 0.1, format!("g = {:.3} (2pi) MHz", on.g / TWO_PI / 1e6)),
        (gp_rel < 0.1, format!("g' = {:.3} (2pi) MHz", on.g_prime / TWO_PI / 1e6)),
        (
            supp_g <= 1e-3 && supp_gp <= 1e-3,
            format!(
                "off/on = {supp_g:.2e} (g), {supp_gp:.2e} (g'); off g = {:.2e} (2pi) Hz",
                off.g / TWO_PI
            ),
        ),
        (gw < 1e-3, format!("gamma_w(20 mK) = {gw:.2e}")),
    ])
}

fn criterion_8() -> Outcome {
    let sim = simulator();
    let u = sim.extract_unitary(SQRT_SWAP_AREA).unwrap();
    let sq = makhlin(&(u * u));
    let sw = makhlin(&swap_gate());
    let cp = compose_controlled_phase(&u);
    let ci = makhlin(&cp);
    let cz = makhlin(&cz_gate());
    let unit = unitarity_residual(&u).max(unitarity_residual(&cp));
    let (d_sq, d_cp) = (sq.distance(&sw), ci.distance(&cz));
    outcome(&[
        (
            d_sq < 1e-8,
            format!(
                "U^2 invariants ({:.3}, {:.3}) vs SWAP ({:.0}, {:.0}), distance {d_sq:.2e}",
                sq.g1, sq.g2.re, sw.g1.re, sw.g2.re
            ),
        ),
        (
            d_cp < 1e-8,
            format!(
                "CP invariants ({:.3}, {:.3}) vs CZ ({:.0}, {:.0}), distance {d_cp:.2e}",
                ci.g1, ci.g2.re, cz.g1.re, cz.g2.re
            ),
        ),
        (unit < 1e-8, format!("unitarity residual {unit:.1e}")),
    ])
}

fn criterion_9() -> Outcome {
    let f = |n_fock| {
        let sim = Simulator {
            truncation: Truncation {
                n_fock,
                ..Truncation::default()
            },
            ..simulator()
        };
        fidelity(&sim.run_state_transfer(h(), h(), Model::Effective).unwrap())
    };
    let (f10, f20) = (f(10), f(20));
    let d = (f10 - f20).abs();
    outcome(&[(d < 1e-4, format!("F1(N=10) = {f10:.8}, F1(N=20) = {f20:.8}, |diff| = {d:.1e}"))])
}

fn criterion_10() -> Outcome {
    let sweep = SweepConfig {
        axis1: SweepAxis {
            param: "couplings.gamma_r".into(),
            values: linspace(0.0, 1e7, 10),
        },
        axis2: Some(SweepAxis {
            param: "device.gamma_p_over_2pi_hz".into(),
            values: linspace(1e6, 10e6, 10),
        }),
    };
    let r = run_sweep(&ExperimentConfig::simulation(), &sweep, Execution::default()).unwrap();
    let m = r.matrix();
    let (hi, lo) = (m[0][0], m[9][9]);
    outcome(&[(
        r.monotone_non_increasing(0.0),
        format!("10x10 grid, F1 from {hi:.5} to {lo:.5}, monotone non-increasing on both axes"),
    )])
}

fn report(id: u8, name: &str, run: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let o = run();
    println!(
        "{} criterion {id:>2} ({name}, {:.1} s): {}",
        if o.pass { "PASS" } else { "FAIL" },
        t0.elapsed().as_secs_f64(),
        o.detail
    );
    o.pass
}

fn main() -> ExitCode {
    let mut res = Residuals::default();
    let passed = [
        report(1, "fidelity regression", || criterion_1(&mut res)),
        report(2, "closed-system exactness", || criterion_2(&mut res)),
        report(3, "adiabatic-elimination validation", || criterion_3(&mut res)),
        report(4, "correlation-function oracle", criterion_4),
        report(5, "invariant suite", || criterion_5(&res)),
        report(6, "sensitivity reproduction", criterion_6),
        report(7, "parameter-chain sanity", criterion_7),
        report(8, "gate algebra", criterion_8),
        report(9, "truncation stability", criterion_9),
        report(10, "decoherence grid monotonicity", criterion_10),
    ];
    let n_pass = passed.iter().filter(|p| **p).count();
    println!("{n_pass} of {} criteria passed", passed.len());
    if n_pass == passed.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
