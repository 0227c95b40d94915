//! CSV and JSON writers. Every file carries the resolved configuration
//! and the library version.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::dynamics::SimulationResult;
use crate::error::Result;
use crate::sweep::SweepResult;

pub const TOOL: &str = "hybridsim";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: Value,
}

impl Provenance {
    pub fn new(config: Value) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            config,
        }
    }
}

fn write_header(w: &mut impl Write, prov: &Provenance) -> Result<()> {
    writeln!(w, "# {} {}", prov.tool, prov.version)?;
    writeln!(w, "# config: {}", serde_json::to_string(&prov.config)?)?;
    Ok(())
}

/// Columns `t`, then each named trace in order.
pub fn write_trajectory_csv(path: &Path, result: &SimulationResult, prov: &Provenance) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    write_header(&mut file, prov)?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec!["t".to_string()];
    header.extend(result.traces.iter().map(|t| t.name.clone()));
    w.write_record(&header)?;
    for (k, t) in result.times.iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(result.traces.iter().map(|tr| tr.values[k].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per cell: indices, axis values, fidelity.
pub fn write_sweep_csv(path: &Path, sweep: &SweepResult, prov: &Provenance) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    write_header(&mut file, prov)?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec!["i".to_string(), "j".into(), sweep.axis1.clone()];
    if let Some(a2) = &sweep.axis2 {
        header.push(a2.clone());
    }
    header.push("fidelity".into());
    w.write_record(&header)?;
    for r in &sweep.rows {
        let mut row = vec![r.cell.i.to_string(), r.cell.j.to_string(), r.cell.x.to_string()];
        if let Some(y) = r.cell.y {
            row.push(y.to_string());
        }
        row.push(r.fidelity.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Report object: provenance fields followed by `kind` and `body`.
pub fn report<T: Serialize>(kind: &str, body: &T, prov: &Provenance) -> Result<Value> {
    Ok(json!({
        "tool": prov.tool,
        "version": prov.version,
        "kind": kind,
        "config": prov.config,
        "result": serde_json::to_value(body)?,
    }))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file)?;
    file.flush()?;
    Ok(())
}

/// Trajectory metadata: dims, step, invariant residuals and the final
/// fidelity.
pub fn trajectory_summary(result: &SimulationResult, schedule: &impl Serialize) -> Value {
    json!({
        "dims": result.final_state.space.dims(),
        "samples": result.times.len(),
        "duration": result.times.last().copied().unwrap_or(0.0),
        "integrator": {
            "method": "rk4",
            "step": result.step,
            "steps": result.steps,
        },
        "schedule": schedule,
        "fidelity": result.fidelity,
        "max_trace_drift": result.max_trace_drift,
        "max_hermiticity_residual": result.max_hermiticity,
        "min_eigenvalue": result.min_eigenvalue,
    })
}
