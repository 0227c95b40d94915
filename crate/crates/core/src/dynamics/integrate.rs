//! Fixed-step fourth-order Runge–Kutta on the density-matrix ODE.

use serde::Serialize;

use super::sparse::CompiledLiouvillian;
use super::LiouvillianSpec;
use crate::error::{Error, Result};
use crate::ops::{c, fidelity, partial_trace, CMatrix, CVector, DensityMatrix};
use crate::pulse::PulseSchedule;

pub const TRACE_DRIFT_TOL: f64 = 1e-8;
pub const HERMITICITY_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-7;
const MIN_STEP: f64 = 1e-21;
const MAX_STEPS: u64 = 2_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Part {
    Re,
    Im,
    Abs,
}

#[derive(Debug, Clone)]
pub enum ProbeKind {
    /// Re Tr(Aρ)
    Expectation(CMatrix),
    /// ⟨row|ρ_keep|col⟩ of the state reduced to `keep`
    Element {
        keep: Vec<usize>,
        row: usize,
        col: usize,
        part: Part,
    },
    /// ⟨ψ|ρ_keep|ψ⟩
    Fidelity { keep: Vec<usize>, target: CVector },
}

#[derive(Debug, Clone)]
pub struct Probe {
    pub name: String,
    pub kind: ProbeKind,
}

impl Probe {
    pub fn new(name: impl Into<String>, kind: ProbeKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }
}

fn reduce(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.len() == rho.space.num_factors() && keep.iter().enumerate().all(|(i, &k)| i == k) {
        Ok(rho.clone())
    } else {
        partial_trace(rho, keep)
    }
}

fn evaluate(probe: &Probe, rho: &DensityMatrix) -> Result<f64> {
    Ok(match &probe.kind {
        ProbeKind::Expectation(a) => (a * &rho.matrix).trace().re,
        ProbeKind::Element {
            keep,
            row,
            col,
            part,
        } => {
            let z = reduce(rho, keep)?.element(*row, *col);
            match part {
                Part::Re => z.re,
                Part::Im => z.im,
                Part::Abs => z.norm(),
            }
        }
        ProbeKind::Fidelity { keep, target } => fidelity(&reduce(rho, keep)?, target)?,
    })
}

#[derive(Debug, Clone)]
pub struct IntegratorOptions {
    /// Steps per radian of phase at the fastest frequency scale.
    pub resolution: f64,
    pub probes: Vec<Probe>,
    /// Fidelity reported in [`SimulationResult::fidelity`], on the factors
    /// listed.
    pub target: Option<(Vec<usize>, CVector)>,
    pub check_positivity: bool,
    /// Upper bound on the step, on top of the frequency rule.
    pub max_step: Option<f64>,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            resolution: 50.0,
            probes: Vec::new(),
            target: None,
            check_positivity: true,
            max_step: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trace {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub times: Vec<f64>,
    pub traces: Vec<Trace>,
    pub final_state: DensityMatrix,
    pub fidelity: Option<f64>,
    pub step: f64,
    pub steps: u64,
    pub max_trace_drift: f64,
    pub max_hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl SimulationResult {
    pub fn trace(&self, name: &str) -> Option<&[f64]> {
        self.traces
            .iter()
            .find(|t| t.name == name)
            .map(|t| t.values.as_slice())
    }
}

fn row_abs_sum_bounds(m: &CMatrix) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m.nrows() {
        let centre = m[(i, i)].re;
        let radius: f64 = (0..m.ncols())
            .filter(|&j| j != i)
            .map(|j| m[(i, j)].norm())
            .sum();
        lo = lo.min(centre - radius);
        hi = hi.max(centre + radius);
    }
    (lo, hi)
}

/// Largest angular frequency of the generator: Gershgorin spread of the
/// Hamiltonian at peak coupling plus a bound on the decay rates.
pub(crate) fn frequency_scale(l: &LiouvillianSpec, g_peak: f64) -> f64 {
    let h = &l.static_hamiltonian.matrix + &l.drive_coupling.matrix * c(g_peak, 0.0);
    let (lo, hi) = row_abs_sum_bounds(&h);
    let decay: f64 = l
        .dissipators
        .iter()
        .map(|d| {
            let cdc = d.collapse.matrix.adjoint() * &d.collapse.matrix;
            let (_, top) = row_abs_sum_bounds(&cdc);
            d.rate * top.max(0.0)
        })
        .sum();
    (hi - lo).max(0.0) + decay
}

/// Sample instants and segment boundaries, merged and sorted.
fn time_grid(schedule: &PulseSchedule, sample_dt: f64) -> Vec<(f64, bool)> {
    let t_end = schedule.duration();
    let mut grid: Vec<(f64, bool)> = Vec::new();
    if t_end > 0.0 {
        let n = (t_end / sample_dt).floor() as u64;
        for k in 0..=n {
            let t = k as f64 * sample_dt;
            if t < t_end {
                grid.push((t, true));
            }
        }
        for bp in schedule.breakpoints() {
            grid.push((bp, false));
        }
    }
    grid.push((t_end, true));
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eps = 1e-12 * t_end.max(f64::MIN_POSITIVE);
    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(grid.len());
    for (t, sample) in grid {
        match merged.last_mut() {
            Some(last) if (t - last.0).abs() <= eps => last.1 |= sample,
            _ => merged.push((t, sample)),
        }
    }
    merged
}

/// Envelope on [a, b], which lies within one segment.
fn interval_envelope(schedule: &PulseSchedule, a: f64, b: f64) -> impl Fn(f64) -> f64 + '_ {
    let mid = 0.5 * (a + b);
    let mut start = 0.0;
    let mut owner = None;
    for seg in &schedule.segments {
        let end = start + seg.duration;
        if mid >= start && mid <= end {
            owner = Some((start, *seg));
            break;
        }
        start = end;
    }
    move |t: f64| match owner {
        Some((s0, seg)) => seg.value(t - s0),
        None => 0.0,
    }
}

fn max_abs_diff_hermitian(m: &[num_complex::Complex64], d: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..d {
        for i in 0..=j {
            worst = worst.max((m[i + j * d] - m[j + i * d].conj()).norm());
        }
    }
    worst
}

/// Integrates ρ̇ = 𝓛(t)ρ over the schedule, sampling every `sample_dt`.
pub fn integrate(
    l: &LiouvillianSpec,
    rho0: &DensityMatrix,
    schedule: &PulseSchedule,
    sample_dt: f64,
    opts: &IntegratorOptions,
) -> Result<SimulationResult> {
    l.validate()?;
    if rho0.space != l.space {
        return Err(Error::Dimension("initial state and Liouvillian spaces differ".into()));
    }
    if !(sample_dt > 0.0) {
        return Err(Error::param("sample_dt", "must be > 0"));
    }
    let omega_max = frequency_scale(l, schedule.peak());
    let mut h_max = sample_dt;
    if omega_max > 0.0 {
        h_max = h_max.min(1.0 / (opts.resolution * omega_max));
    }
    if let Some(m) = opts.max_step {
        h_max = h_max.min(m);
    }
    if !(h_max >= MIN_STEP) {
        return Err(Error::StepUnderflow(h_max));
    }
    let t_end = schedule.duration();
    if t_end / h_max > MAX_STEPS as f64 {
        return Err(Error::StepUnderflow(h_max));
    }

    let d = l.space.dim();
    let n2 = d * d;
    let mut compiled = CompiledLiouvillian::new(l);
    let mut rho: Vec<_> = rho0.matrix.as_slice().to_vec();
    let zero = c(0.0, 0.0);
    let mut k1 = vec![zero; n2];
    let mut k2 = vec![zero; n2];
    let mut k3 = vec![zero; n2];
    let mut k4 = vec![zero; n2];
    let mut tmp = vec![zero; n2];

    let mut times = Vec::new();
    let mut traces: Vec<Trace> = opts
        .probes
        .iter()
        .map(|p| Trace {
            name: p.name.clone(),
            values: Vec::new(),
        })
        .collect();
    let mut max_drift: f64 = 0.0;
    let mut max_herm: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut steps: u64 = 0;
    let mut smallest_step: f64 = 0.0;

    let grid = time_grid(schedule, sample_dt);
    let mut record = |t: f64, rho: &[num_complex::Complex64]| -> Result<()> {
        let state = DensityMatrix::from_matrix_unchecked(l.space.clone(), CMatrix::from_column_slice(d, d, rho));
        let tr = state.trace();
        let drift = (tr.re - 1.0).abs().max(tr.im.abs());
        let herm = max_abs_diff_hermitian(rho, d);
        max_drift = max_drift.max(drift);
        max_herm = max_herm.max(herm);
        if drift > TRACE_DRIFT_TOL {
            return Err(Error::Invariant {
                time: t,
                detail: format!("trace drift {drift:e} exceeds {TRACE_DRIFT_TOL:e}"),
            });
        }
        if herm > HERMITICITY_TOL {
            return Err(Error::Invariant {
                time: t,
                detail: format!("hermiticity residual {herm:e} exceeds {HERMITICITY_TOL:e}"),
            });
        }
        if opts.check_positivity {
            let lam = state.min_eigenvalue();
            min_eig = min_eig.min(lam);
            if lam < -POSITIVITY_TOL {
                return Err(Error::Invariant {
                    time: t,
                    detail: format!("minimum eigenvalue {lam:e} below -{POSITIVITY_TOL:e}"),
                });
            }
        }
        times.push(t);
        for (probe, trace) in opts.probes.iter().zip(traces.iter_mut()) {
            trace.values.push(evaluate(probe, &state)?);
        }
        Ok(())
    };

    if grid[0].1 {
        record(grid[0].0, &rho)?;
    }
    for w in grid.windows(2) {
        let (a, b) = (w[0].0, w[1].0);
        let span = b - a;
        if span > 0.0 {
            let n = (span / h_max).ceil().max(1.0) as u64;
            let h = span / n as f64;
            smallest_step = smallest_step.max(h);
            let env = interval_envelope(schedule, a, b);
            for k in 0..n {
                let t = a + k as f64 * h;
                let (g1, g2, g4) = (env(t), env(t + 0.5 * h), env(t + h));
                compiled.apply(g1, &rho, &mut k1);
                axpy(&rho, 0.5 * h, &k1, &mut tmp);
                compiled.apply(g2, &tmp, &mut k2);
                axpy(&rho, 0.5 * h, &k2, &mut tmp);
                compiled.apply(g2, &tmp, &mut k3);
                axpy(&rho, h, &k3, &mut tmp);
                compiled.apply(g4, &tmp, &mut k4);
                let s = h / 6.0;
                for i in 0..n2 {
                    rho[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * s;
                }
            }
            steps += n;
        }
        if w[1].1 {
            record(b, &rho)?;
        }
    }

    let final_state = DensityMatrix::from_matrix_unchecked(l.space.clone(), CMatrix::from_column_slice(d, d, &rho));
    let fid = match &opts.target {
        Some((keep, target)) => Some(fidelity(&reduce(&final_state, keep)?, target)?),
        None => None,
    };
    Ok(SimulationResult {
        times,
        traces,
        final_state,
        fidelity: fid,
        step: if steps == 0 { h_max } else { smallest_step },
        steps,
        max_trace_drift: max_drift,
        max_hermiticity: max_herm,
        min_eigenvalue: min_eig,
    })
}

fn axpy(x: &[num_complex::Complex64], a: f64, y: &[num_complex::Complex64], out: &mut [num_complex::Complex64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + yi * a;
    }
}

/// Closed-system evolution of a ket under H(t) = H_static + g(t) H_drive
/// (dissipators ignored), by the same fixed-step RK4.
pub fn propagate_ket(
    l: &LiouvillianSpec,
    psi0: &CVector,
    schedule: &PulseSchedule,
    resolution: f64,
) -> Result<CVector> {
    let closed = l.closed();
    let d = closed.space.dim();
    if psi0.len() != d {
        return Err(Error::Dimension("ket and Liouvillian spaces differ".into()));
    }
    let compiled = CompiledLiouvillian::new(&closed);
    let (h0, hd) = compiled.hamiltonian_parts();
    let omega_max = frequency_scale(&closed, schedule.peak());
    let h_max = if omega_max > 0.0 {
        1.0 / (resolution * omega_max)
    } else {
        f64::INFINITY
    };
    let minus_i = c(0.0, -1.0);
    let deriv = |g: f64, x: &[num_complex::Complex64], out: &mut [num_complex::Complex64]| {
        out.iter_mut().for_each(|z| *z = c(0.0, 0.0));
        h0.apply_vec(minus_i, x, out);
        if g != 0.0 {
            hd.apply_vec(minus_i * g, x, out);
        }
    };
    let mut psi: Vec<_> = psi0.as_slice().to_vec();
    let zero = c(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; d], vec![zero; d], vec![zero; d], vec![zero; d], vec![zero; d]);
    let bps = schedule.breakpoints();
    for w in bps.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let n = ((b - a) / h_max).ceil().max(1.0) as u64;
        let h = (b - a) / n as f64;
        let env = interval_envelope(schedule, a, b);
        for k in 0..n {
            let t = a + k as f64 * h;
            let (g1, g2, g4) = (env(t), env(t + 0.5 * h), env(t + h));
            deriv(g1, &psi, &mut k1);
            axpy(&psi, 0.5 * h, &k1, &mut tmp);
            deriv(g2, &tmp, &mut k2);
            axpy(&psi, 0.5 * h, &k2, &mut tmp);
            deriv(g2, &tmp, &mut k3);
            axpy(&psi, h, &k3, &mut tmp);
            deriv(g4, &tmp, &mut k4);
            let s = h / 6.0;
            for i in 0..d {
                psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * s;
            }
        }
    }
    Ok(CVector::from_vec(psi))
}
