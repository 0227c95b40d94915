use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use hybridsim::config::ExperimentConfig;
use hybridsim::device::{couplings_at, DerivedCouplings, RateConvention};
use hybridsim::dynamics::Model;
use hybridsim::gates::{makhlin, unitarity_residual, Gate};
use hybridsim::output::{
    report, trajectory_summary, write_json, write_sweep_csv, write_trajectory_csv, Provenance,
};
use hybridsim::protocols::{ProtocolName, Simulator};
use hybridsim::sweep::{run_sweep, Execution};
use hybridsim::units::TWO_PI;
use hybridsim::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "hybridsim", version, about = "Majorana qubit / nanomechanical resonator simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment config (TOML or JSON). Defaults to the built-in
    /// fidelity-study parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `effective` or `full`.
    #[arg(long, global = true, value_parser = parse_model)]
    model: Option<Model>,
    /// Resonator Fock cutoff.
    #[arg(long = "n-fock", global = true)]
    n_fock: Option<usize>,
    /// state-transfer, entangle, sqrt-swap, cp-gate or sensitivity.
    #[arg(long, global = true, value_parser = parse_protocol)]
    protocol: Option<ProtocolName>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the device-parameter chain and write params.json.
    Params {
        #[command(flatten)]
        common: Common,
    },
    /// Run one protocol and write its trajectory (CSV) and report (JSON).
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Pulse area in rad; accepts multiples of pi such as `-3pi/2`.
        #[arg(long, value_parser = parse_area, allow_hyphen_values = true)]
        area: Option<f64>,
        /// Switch off every dissipative channel.
        #[arg(long)]
        closed: bool,
    },
    /// Run the `[sweep]` grid of the config and write sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Evaluate cells one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Extract the closed-system gate and report unitarity and local
    /// invariants.
    GateCheck {
        #[command(flatten)]
        common: Common,
        /// Check a single pulse of this area instead of the CP composition.
        #[arg(long, value_parser = parse_area, allow_hyphen_values = true)]
        area: Option<f64>,
        /// Gate extraction requires the closed system.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        closed: bool,
    },
}

fn parse_model(s: &str) -> std::result::Result<Model, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_protocol(s: &str) -> std::result::Result<ProtocolName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A real number, or `[±][k]pi[/d]` (also `π`).
fn parse_area(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().replace('π', "pi");
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let bad = || format!("cannot parse area `{s}`");
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let k = num.strip_suffix("pi").ok_or_else(bad)?.trim_end_matches('*');
    let k = match k {
        "" | "+" => 1.0,
        "-" => -1.0,
        k => k.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(k * std::f64::consts::PI / den)
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::simulation(),
    };
    if let Some(m) = common.model {
        cfg.protocol.model = m;
    }
    if let Some(n) = common.n_fock {
        cfg.truncation.n_fock = n;
    }
    if let Some(p) = common.protocol {
        cfg.protocol.name = p;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> Result<&Path> {
    let dir = cfg.output.dir.as_path();
    fs::create_dir_all(dir)?;
    Ok(dir)
}

fn formulas(convention: RateConvention) -> Value {
    json!({
        "omega_t": "E(theta) = (v_F/L) sqrt(Lambda^2 + f0(Lambda)^2), Lambda = (Delta0 L / v_F) sin(theta/2), f0 inverts x/tan(x)",
        "fermi_velocity": "override if given, else v [cos(mu W) + (Delta0 W/v)/(mu W) sin(mu W)] (Delta0 W/v)^2 / ((mu W)^2 + (Delta0 W/v)^2)",
        "xi": "2 pi S G u0 / Phi0",
        "zeta": "given, else 2 sqrt(pi) (E_C/E_L)^(1/4)",
        "g": "xi/sqrt(2) dE/dtheta",
        "g_prime": "zeta/sqrt(2) dE/dtheta",
        "n_p": "1/(exp(hbar omega_p / k_B T) - 1)",
        "n_r": "1/(exp(hbar omega_r / k_B T) - 1)",
        "delta_shift": "gamma_p g'^2 / (2 omega_p^2)",
        "gamma_big_p": "2 gamma_p^2 omega_t g'^2 / omega_p^4",
        "gamma_r": match convention {
            RateConvention::Cycle => "(omega_r / 2pi) / Q_r",
            RateConvention::Angular => "omega_r / Q_r",
        },
        "gamma_w": "exp(-h v_F / (k_B T L))",
    })
}

fn in_hz(dc: &DerivedCouplings) -> Value {
    json!({
        "omega_t": dc.omega_t / TWO_PI,
        "g": dc.g / TWO_PI,
        "g_prime": dc.g_prime / TWO_PI,
        "delta_shift": dc.delta_shift / TWO_PI,
    })
}

fn cmd_params(common: &Common) -> Result<()> {
    let cfg = load(common)?;
    let p = &cfg.device;
    let on = couplings_at(p, p.theta_on)?;
    let off = couplings_at(p, p.theta_off)?;
    let effective = cfg.derived()?;
    let body = json!({
        "units": "angular quantities in rad/s, rates in 1/s; *_over_2pi_hz blocks in Hz",
        "theta_on": on,
        "theta_on_over_2pi_hz": in_hz(&on),
        "theta_off": off,
        "theta_off_over_2pi_hz": in_hz(&off),
        "with_overrides": effective,
        "formulas": formulas(p.rate_convention),
    });
    let prov = Provenance::new(cfg.to_value());
    let dir = out_dir(&cfg)?;
    write_json(&dir.join("params.json"), &report("params", &body, &prov)?)?;
    println!("theta_on  = {:.4}: E/2pi = {:.6e} Hz, g/2pi = {:.6e} Hz, g'/2pi = {:.6e} Hz, xi = {:.4e}",
        on.theta, on.omega_t / TWO_PI, on.g / TWO_PI, on.g_prime / TWO_PI, on.xi);
    println!("theta_off = {:.4}: E/2pi = {:.6e} Hz, g/2pi = {:.6e} Hz, g'/2pi = {:.6e} Hz",
        off.theta, off.omega_t / TWO_PI, off.g / TWO_PI, off.g_prime / TWO_PI);
    println!("gamma_r = {:.6e} 1/s, Gamma_p = {:.6e} 1/s, Delta = {:.6e} rad/s, N_r = {:.6}, N_p = {:.6e}, gamma_w = {:.3e}",
        effective.gamma_r, effective.gamma_big_p, effective.delta_shift, effective.n_r, effective.n_p, effective.gamma_w);
    println!("wrote {}", dir.join("params.json").display());
    Ok(())
}

fn cmd_simulate(common: &Common, area: Option<f64>, closed: bool) -> Result<()> {
    let mut cfg = load(common)?;
    if area.is_some() {
        cfg.protocol.area = area;
    }
    if closed {
        cfg.protocol.closed = true;
    }
    cfg.validate()?;
    if cfg.protocol.name.is_gate() {
        return gate_report(&cfg, None);
    }
    let mut sim = cfg.simulator()?;
    if cfg.protocol.name == ProtocolName::Sensitivity {
        sim = sim.perturbed(cfg.protocol.perturbation_pct);
    }
    let spec = cfg.protocol_spec()?;
    let result = sim.run(&spec)?;
    let schedule = sim.schedule(spec.pulse_area)?;
    let prov = Provenance::new(cfg.to_value());
    let dir = out_dir(&cfg)?;
    let stem = cfg.protocol.name.as_str();
    let csv = dir.join(format!("{stem}.csv"));
    let js = dir.join(format!("{stem}.json"));
    write_trajectory_csv(&csv, &result, &prov)?;
    let body = json!({
        "protocol": spec,
        "trajectory": trajectory_summary(&result, &schedule),
        "couplings": sim.couplings,
        "detuning": sim.detuning,
        "coupling_scale": sim.coupling_scale,
    });
    write_json(&js, &report("simulate", &body, &prov)?)?;
    println!(
        "{stem} ({:?} model, dims {:?}): fidelity = {:.6}",
        spec.model,
        result.final_state.space.dims(),
        result.fidelity.unwrap_or(f64::NAN)
    );
    println!("wrote {} and {}", csv.display(), js.display());
    Ok(())
}

fn cmd_sweep(common: &Common, sequential: bool) -> Result<()> {
    let cfg = load(common)?;
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| Error::Config("config has no [sweep] table".into()))?;
    let exec = if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let result = run_sweep(&cfg, &sweep, exec)?;
    let prov = Provenance::new(cfg.to_value());
    let dir = out_dir(&cfg)?;
    let csv = dir.join("sweep.csv");
    write_sweep_csv(&csv, &result, &prov)?;
    let body = json!({
        "cells": result.rows.len(),
        "monotone_non_increasing": result.monotone_non_increasing(0.0),
        "sweep": result,
    });
    write_json(&dir.join("sweep.json"), &report("sweep", &body, &prov)?)?;
    println!(
        "{} cells over {}{}; wrote {}",
        result.rows.len(),
        result.axis1,
        result.axis2.as_deref().map(|a| format!(" x {a}")).unwrap_or_default(),
        csv.display()
    );
    Ok(())
}

fn block_phase(u: &Gate) -> Option<num_complex::Complex64> {
    // single-excitation block {|↓1⟩, |↑0⟩}
    let z = u[(1, 1)];
    let off = u[(1, 2)].norm() + u[(2, 1)].norm();
    ((u[(2, 2)] - z).norm() < 1e-8 && off < 1e-8 && (z.norm() - 1.0).abs() < 1e-8).then_some(z)
}

fn gate_report(cfg: &ExperimentConfig, area: Option<f64>) -> Result<()> {
    let sim: Simulator = cfg.simulator()?;
    let prov = Provenance::new(cfg.to_value());
    let dir = out_dir(cfg)?;
    let path = dir.join("gate-check.json");
    let body = match area {
        Some(a) => {
            let u = sim.extract_unitary(a)?;
            let residual = unitarity_residual(&u);
            let phase = block_phase(&u);
            let identity = (u - Gate::identity()).iter().all(|z| z.norm() < 1e-8);
            println!("area {a:.6} rad: unitarity residual {residual:.2e}");
            match phase {
                Some(z) => println!("single-excitation block = ({:.6} {:+.6}i) I", z.re, z.im),
                None => println!("single-excitation block is not proportional to I"),
            }
            println!("identity: {identity}");
            json!({
                "area": a,
                "unitary": u.iter().collect::<Vec<_>>(),
                "layout": "column-major, basis |down 0>, |down 1>, |up 0>, |up 1>",
                "unitarity_residual": residual,
                "single_excitation_phase": phase,
                "identity": identity,
                "invariants": makhlin(&u),
            })
        }
        None => {
            let r = sim.controlled_phase()?;
            println!(
                "sqrt-swap: unitarity {:.2e}, U^2 ~ SWAP: {} (distance {:.3e})",
                r.sqrt_swap_unitarity,
                r.squares_to_swap(1e-8),
                r.sqrt_swap_squared_distance
            );
            println!(
                "cp: unitarity {:.2e}, invariants ({:.6}, {:.6}) vs CZ ({:.0}, {:.0}), locally CZ: {}",
                r.cp_unitarity,
                r.cp_invariants.g1,
                r.cp_invariants.g2,
                r.cz_reference.g1.re,
                r.cz_reference.g2.re,
                r.cz_equivalent(1e-8)
            );
            serde_json::to_value(&r)?
        }
    };
    write_json(&path, &report("gate-check", &body, &prov)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_gate_check(common: &Common, area: Option<f64>, closed: bool) -> Result<()> {
    if !closed {
        return Err(Error::Config(
            "gate extraction requires the closed system (--closed true)".into(),
        ));
    }
    let cfg = load(common)?;
    gate_report(&cfg, area)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Params { common } => cmd_params(common),
        Command::Simulate {
            common,
            area,
            closed,
        } => cmd_simulate(common, *area, *closed),
        Command::Sweep { common, sequential } => cmd_sweep(common, *sequential),
        Command::GateCheck {
            common,
            area,
            closed,
        } => cmd_gate_check(common, *area, *closed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::parse_area;
    use std::f64::consts::PI;

    #[test]
    fn area_forms() {
        assert_eq!(parse_area("-1.5").unwrap(), -1.5);
        assert_eq!(parse_area("-pi").unwrap(), -PI);
        assert_eq!(parse_area("-2pi").unwrap(), -2.0 * PI);
        assert_eq!(parse_area("-2π").unwrap(), -2.0 * PI);
        assert_eq!(parse_area("-3pi/2").unwrap(), -1.5 * PI);
        assert_eq!(parse_area("pi/2").unwrap(), 0.5 * PI);
        assert!(parse_area("pie").is_err());
    }
}
