//! Cartesian parameter grids evaluated cell by cell.

use serde::Serialize;

use crate::config::{ExperimentConfig, SweepConfig};
use crate::error::{Error, Result};
use crate::protocols::ProtocolName;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How cells are scheduled. `Parallel` falls back to `Sequential` when the
/// crate is built without the `parallel` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: Option<f64>,
}

/// Row-major grid: axis 1 outer, axis 2 inner.
pub fn grid(axis1: &[f64], axis2: Option<&[f64]>) -> Vec<Cell> {
    let mut cells = Vec::new();
    for (i, &x) in axis1.iter().enumerate() {
        match axis2 {
            Some(ys) => cells.extend(ys.iter().enumerate().map(|(j, &y)| Cell {
                i,
                j,
                x,
                y: Some(y),
            })),
            None => cells.push(Cell { i, j: 0, x, y: None }),
        }
    }
    cells
}

/// Applies `f` to every item, returning results in input order.
pub fn map_cells<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub cell: Cell,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub axis1: String,
    pub axis2: Option<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Fidelity matrix indexed [i][j].
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let ni = self.rows.iter().map(|r| r.cell.i).max().map_or(0, |m| m + 1);
        let nj = self.rows.iter().map(|r| r.cell.j).max().map_or(0, |m| m + 1);
        let mut m = vec![vec![f64::NAN; nj]; ni];
        for r in &self.rows {
            m[r.cell.i][r.cell.j] = r.fidelity;
        }
        m
    }

    /// Checks that fidelity never increases along either axis, allowing
    /// `slack` for round-off.
    pub fn monotone_non_increasing(&self, slack: f64) -> bool {
        let m = self.matrix();
        let rows_ok = m.iter().all(|row| row.windows(2).all(|w| w[1] <= w[0] + slack));
        let cols_ok = (0..m.first().map_or(0, Vec::len)).all(|j| {
            m.windows(2).all(|w| w[1][j] <= w[0][j] + slack)
        });
        rows_ok && cols_ok
    }
}

/// Final fidelity of the configured protocol for one config.
pub fn cell_fidelity(cfg: &ExperimentConfig) -> Result<f64> {
    let sim = cfg.simulator()?;
    let spec = cfg.protocol_spec()?;
    if cfg.protocol.name == ProtocolName::Sensitivity {
        return sim.sensitivity(cfg.protocol.perturbation_pct, spec.model);
    }
    sim.run(&spec)?
        .fidelity
        .ok_or_else(|| Error::Convergence("no fidelity recorded".into()))
}

/// Runs the grid described by `sweep` on top of `base`.
pub fn run_sweep(base: &ExperimentConfig, sweep: &SweepConfig, exec: Execution) -> Result<SweepResult> {
    let cells = grid(
        &sweep.axis1.values,
        sweep.axis2.as_ref().map(|a| a.values.as_slice()),
    );
    let configure = |cell: &Cell| -> Result<ExperimentConfig> {
        let mut cfg = base.with_param(&sweep.axis1.param, cell.x)?;
        if let (Some(axis), Some(y)) = (&sweep.axis2, cell.y) {
            cfg = cfg.with_param(&axis.param, y)?;
        }
        Ok(cfg)
    };
    // resolve every cell up front so config errors surface before any run
    let configs = cells.iter().map(configure).collect::<Result<Vec<_>>>()?;
    let results = map_cells(&configs, exec, cell_fidelity);
    let rows = cells
        .into_iter()
        .zip(results)
        .map(|(cell, f)| f.map(|fidelity| SweepRow { cell, fidelity }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis1: sweep.axis1.param.clone(),
        axis2: sweep.axis2.as_ref().map(|a| a.param.clone()),
        rows,
    })
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}
