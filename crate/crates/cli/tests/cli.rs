use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybridsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Header names and the last data row of a trajectory CSV.
fn csv_tail(path: &Path) -> (Vec<String>, Vec<f64>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let last = lines
        .next_back()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    (header, last)
}

fn column(header: &[String], row: &[f64], name: &str) -> f64 {
    row[header.iter().position(|h| h == name).unwrap()]
}

#[test]
fn params_reports_chain_and_off_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("calibrated.toml");
    ok(&["params", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    let r = json(&dir.path().join("params.json"));
    assert_eq!(r["kind"], "params");
    assert!(r["config"]["device"].is_object());
    let hz = &r["result"]["theta_on_over_2pi_hz"];
    let g = hz["g"].as_f64().unwrap();
    let gp = hz["g_prime"].as_f64().unwrap();
    assert!((g / -20e6 - 1.0).abs() < 0.1, "{g}");
    assert!((gp / -100e6 - 1.0).abs() < 0.1, "{gp}");
    let g_off = r["result"]["theta_off_over_2pi_hz"]["g"].as_f64().unwrap();
    assert!((g_off / g).abs() < 1e-3);
    assert!(r["result"]["formulas"]["g"].is_string());
}

#[test]
fn missing_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("example.toml"))
        .unwrap()
        .replace("quality_factor = 1e3\n", "");
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, text).unwrap();
    let out = run(&["params", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("quality_factor"));
}

#[test]
fn simulate_writes_element_columns_and_fidelities() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = configs().join("transfer-q1e3.toml");
    let cfg = cfg.to_str().unwrap();
    ok(&["simulate", "--config", cfg, "--out", out]);
    ok(&["simulate", "--config", cfg, "--out", out, "--protocol", "entangle"]);
    let (header, last) = csv_tail(&dir.path().join("state-transfer.csv"));
    assert_eq!(header[0], "t");
    for name in ["rho_s00", "rho_s01", "rho_s02", "rho_s11", "rho_s12", "rho_s22", "fidelity"] {
        assert!(header.iter().any(|h| h == name), "missing {name}");
    }
    let f1 = column(&header, &last, "fidelity");
    assert!((f1 - 0.990).abs() <= 0.005, "{f1}");
    let (header, last) = csv_tail(&dir.path().join("entangle.csv"));
    let f2 = column(&header, &last, "fidelity");
    assert!((f2 - 0.993).abs() <= 0.005, "{f2}");
    let report = json(&dir.path().join("state-transfer.json"));
    assert_eq!(report["result"]["trajectory"]["dims"], serde_json::json!([2, 10]));
    assert!(report["result"]["trajectory"]["integrator"]["step"].as_f64().unwrap() > 0.0);
}

#[test]
fn zero_area_echoes_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["simulate", "--area", "0", "--out", dir.path().to_str().unwrap()]);
    let (header, last) = csv_tail(&dir.path().join("state-transfer.csv"));
    assert_eq!(column(&header, &last, "t"), 0.0);
    assert!((column(&header, &last, "rho_s00") - 0.5).abs() < 1e-15);
    assert!((column(&header, &last, "rho_s22") - 0.5).abs() < 1e-15);
    assert!((column(&header, &last, "rho_s02") - 0.5).abs() < 1e-15);
}

#[test]
fn outputs_are_bit_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ok(&["simulate", "--protocol", "sqrt-swap", "--out", d.path().to_str().unwrap()]);
    }
    // Only the recorded output directory may differ.
    let read = |d: &tempfile::TempDir, f: &str| {
        std::fs::read_to_string(d.path().join(f))
            .unwrap()
            .replace(d.path().to_str().unwrap(), "OUT")
    };
    for f in ["sqrt-swap.csv", "sqrt-swap.json"] {
        assert_eq!(read(&a, f), read(&b, f));
    }
}

#[test]
fn single_cell_sweep_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.toml");
    let example = configs().join("example.toml");
    std::fs::write(
        &cfg,
        format!(
            "[device]\npath = {:?}\n\n[couplings]\nomega_t_over_2pi_hz = 1e9\ng_over_2pi_hz = -20e6\n\
             g_prime_over_2pi_hz = -100e6\n\n[sweep.axis1]\nparam = \"device.temperature\"\nvalues = [0.025]\n",
            example.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out]);
    ok(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out]);
    let (h, row) = csv_tail(&dir.path().join("sweep.csv"));
    let (th, trow) = csv_tail(&dir.path().join("state-transfer.csv"));
    assert_eq!(column(&h, &row, "fidelity"), column(&th, &trow, "fidelity"));
}

#[test]
fn sweep_grid_is_ordered_and_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("grid.toml");
    let example = configs().join("example.toml");
    std::fs::write(
        &cfg,
        format!(
            "[device]\npath = {:?}\n\n[couplings]\nomega_t_over_2pi_hz = 1e9\ng_over_2pi_hz = -20e6\n\
             g_prime_over_2pi_hz = -100e6\n\n[sweep.axis1]\nparam = \"couplings.gamma_r\"\nvalues = [0.0, 2e6, 4e6]\n\n\
             [sweep.axis2]\nparam = \"device.gamma_p_over_2pi_hz\"\nvalues = [1e6, 5e6, 10e6]\n",
            example.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out, "--sequential"]);
    let r = json(&dir.path().join("sweep.json"));
    assert_eq!(r["result"]["cells"], 9);
    assert_eq!(r["result"]["monotone_non_increasing"], true);
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<(u32, u32)> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let mut it = l.split(',');
            (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
        })
        .collect();
    let mut sorted = rows.clone();
    sorted.sort();
    assert_eq!(rows, sorted);
}

#[test]
fn gate_check_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&["gate-check", "--out", out]);
    let r = json(&dir.path().join("gate-check.json"));
    assert!(r["result"]["cp_unitarity"].as_f64().unwrap() < 1e-8);
    assert!(r["result"]["cp_distance"].is_number());
    ok(&["gate-check", "--area", "-2pi", "--out", out]);
    let r = json(&dir.path().join("gate-check.json"));
    assert_eq!(r["result"]["identity"], false);
    let phase = &r["result"]["single_excitation_phase"];
    assert!((phase[0].as_f64().unwrap() + 1.0).abs() < 1e-8);
    ok(&["gate-check", "--area", "0", "--out", out]);
    assert_eq!(json(&dir.path().join("gate-check.json"))["result"]["identity"], true);
}

#[test]
fn gate_check_refuses_open_system() {
    let out = run(&["gate-check", "--closed", "false"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_protocol_is_rejected() {
    let out = run(&["simulate", "--protocol", "teleport"]);
    assert_eq!(out.status.code(), Some(2));
}
