//! Experiment configuration files (TOML or JSON).

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::device::{couplings, CouplingOverrides, DerivedCouplings, DeviceParams};
use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::protocols::{ProtocolName, ProtocolSpec, Simulator, Truncation};
use crate::pulse::PulseShape;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub name: ProtocolName,
    pub model: Model,
    /// Amplitude of |↓0⟩ as [re, im].
    pub mu: [f64; 2],
    /// Amplitude of |↑0⟩ as [re, im].
    pub nu: [f64; 2],
    /// Replaces the protocol's nominal pulse area, rad.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    pub pulse: PulseShape,
    pub sample_dt: f64,
    /// Percentage error used by the sensitivity protocol.
    pub perturbation_pct: f64,
    /// Drop every dissipative channel.
    pub closed: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            name: ProtocolName::StateTransfer,
            model: Model::Effective,
            mu: [h, 0.0],
            nu: [h, 0.0],
            area: None,
            pulse: PulseShape::default(),
            sample_dt: 0.25e-9,
            perturbation_pct: 1.0,
            closed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted path into the config, e.g. `couplings.gamma_r`.
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis1: SweepAxis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<SweepAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

/// A fully resolved experiment. The device table may instead name a
/// parameter file through `path`, with inline keys taking precedence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub device: DeviceParams,
    #[serde(default)]
    pub couplings: CouplingOverrides,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default)]
    pub output: OutputConfig,
}

const SECTIONS: [&str; 6] = ["device", "couplings", "protocol", "sweep", "truncation", "output"];

fn section<T: DeserializeOwned>(name: &str, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Config(format!("[{name}]: {e}")))
}

fn parse_document(text: &str, json: bool) -> Result<Value> {
    if json {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    } else {
        let t: toml::Value = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        serde_json::to_value(t).map_err(|e| Error::Config(e.to_string()))
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn read_document(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_document(&text, is_json(path))
}

/// Replaces `device.path` by the contents of the named file.
fn resolve_device(doc: &mut Value, base: Option<&Path>) -> Result<()> {
    let Some(device) = doc.get_mut("device").and_then(Value::as_object_mut) else {
        return Ok(());
    };
    let Some(path) = device.remove("path") else {
        return Ok(());
    };
    let path = PathBuf::from(
        path.as_str()
            .ok_or_else(|| Error::Config("[device]: `path` must be a string".into()))?,
    );
    let path = match base {
        Some(b) if path.is_relative() => b.join(path),
        _ => path,
    };
    let mut loaded = read_document(&path)?;
    // a parameter file may be a bare device table or a whole experiment
    if let Some(inner) = loaded.get("device").cloned() {
        loaded = inner;
    }
    let Value::Object(mut merged) = loaded else {
        return Err(Error::Config(format!("{}: expected a table", path.display())));
    };
    for (k, v) in std::mem::take(device) {
        merged.insert(k, v);
    }
    *device = merged;
    Ok(())
}

impl ExperimentConfig {
    pub fn new(device: DeviceParams) -> Self {
        Self {
            device,
            couplings: CouplingOverrides::default(),
            protocol: ProtocolConfig::default(),
            sweep: None,
            truncation: Truncation::default(),
            output: OutputConfig::default(),
        }
    }

    /// The numerical study: example device with the simulation couplings.
    pub fn simulation() -> Self {
        Self {
            couplings: CouplingOverrides::simulation(),
            ..Self::new(DeviceParams::example())
        }
    }

    pub fn from_value(doc: Value) -> Result<Self> {
        let Value::Object(mut map) = doc else {
            return Err(Error::Config("config must be a table".into()));
        };
        if let Some(k) = map.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown section `{k}`")));
        }
        let sweep = map.remove("sweep");
        let mut take = |k: &str| map.remove(k).unwrap_or(Value::Object(Map::new()));
        let cfg = Self {
            device: section("device", take("device"))?,
            couplings: section("couplings", take("couplings"))?,
            protocol: section("protocol", take("protocol"))?,
            sweep: match sweep {
                Some(v) => Some(section("sweep", v)?),
                None => None,
            },
            truncation: section("truncation", take("truncation"))?,
            output: section("output", take("output"))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut doc = parse_document(text, false)?;
        resolve_device(&mut doc, None)?;
        Self::from_value(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut doc = read_document(path)?;
        resolve_device(&mut doc, path.parent())?;
        Self::from_value(doc)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.device.validate()?;
        let t = &self.truncation;
        if t.n_fock < 2 {
            return Err(Error::param("truncation.n_fock", "must be >= 2"));
        }
        if t.m_fock < 2 {
            return Err(Error::param("truncation.m_fock", "must be >= 2"));
        }
        let p = &self.protocol;
        if !(p.sample_dt.is_finite() && p.sample_dt > 0.0) {
            return Err(Error::param("protocol.sample_dt", "must be finite and > 0"));
        }
        if let PulseShape::Ramped { ramp_time } = p.pulse {
            if !(ramp_time.is_finite() && ramp_time >= 0.0) {
                return Err(Error::param("protocol.pulse.ramp_time", "must be finite and >= 0"));
            }
        }
        if !p.perturbation_pct.is_finite() {
            return Err(Error::param("protocol.perturbation_pct", "must be finite"));
        }
        if let Some(a) = p.area {
            if !a.is_finite() {
                return Err(Error::param("protocol.area", "must be finite"));
            }
        }
        let norm = p.mu[0].powi(2) + p.mu[1].powi(2) + p.nu[0].powi(2) + p.nu[1].powi(2);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::param(
                "protocol.mu, protocol.nu",
                format!("|mu|^2 + |nu|^2 = {norm}, expected 1"),
            ));
        }
        if let Some(s) = &self.sweep {
            for axis in std::iter::once(&s.axis1).chain(s.axis2.as_ref()) {
                if axis.values.is_empty() {
                    return Err(Error::param(&axis.param, "sweep axis has no values"));
                }
                if let Some(v) = axis.values.iter().find(|v| !v.is_finite()) {
                    return Err(Error::param(&axis.param, format!("non-finite value {v}")));
                }
                if axis.param.starts_with("sweep") {
                    return Err(Error::param(&axis.param, "cannot sweep the sweep table"));
                }
            }
        }
        Ok(())
    }

    /// Copy with the scalar at `path` (dotted, on-disk names and units)
    /// replaced by `value`.
    pub fn with_param(&self, path: &str, value: f64) -> Result<Self> {
        let mut doc = self.to_value();
        set_path(&mut doc, path, value)?;
        Self::from_value(doc)
    }

    pub fn derived(&self) -> Result<DerivedCouplings> {
        Ok(couplings(&self.device)?.with_overrides(&self.couplings))
    }

    pub fn simulator(&self) -> Result<Simulator> {
        let mut sim = Simulator::new(self.derived()?);
        sim.truncation = self.truncation;
        sim.pulse = self.protocol.pulse;
        sim.sample_dt = self.protocol.sample_dt;
        if self.protocol.closed {
            sim = sim.closed();
        }
        Ok(sim)
    }

    pub fn mu(&self) -> Complex64 {
        Complex64::new(self.protocol.mu[0], self.protocol.mu[1])
    }

    pub fn nu(&self) -> Complex64 {
        Complex64::new(self.protocol.nu[0], self.protocol.nu[1])
    }

    /// Protocol definition for the trajectory protocols.
    pub fn protocol_spec(&self) -> Result<ProtocolSpec> {
        let p = &self.protocol;
        let mut spec = match p.name {
            ProtocolName::StateTransfer | ProtocolName::Sensitivity => {
                ProtocolSpec::state_transfer(self.mu(), self.nu(), p.model)?
            }
            ProtocolName::Entangle => ProtocolSpec::entangle(p.model),
            ProtocolName::SqrtSwap => ProtocolSpec::sqrt_swap(p.model),
            ProtocolName::CpGate => {
                return Err(Error::Config(
                    "cp-gate is a gate protocol; use gate-check".into(),
                ))
            }
        };
        if let Some(area) = p.area {
            let (mu, nu) = initial_amplitudes(&spec);
            spec.pulse_area = area;
            spec.target = crate::protocols::exchange_target(mu, nu, area);
        }
        Ok(spec)
    }
}

fn initial_amplitudes(spec: &ProtocolSpec) -> (Complex64, Complex64) {
    let mut mu = Complex64::new(0.0, 0.0);
    let mut nu = mu;
    for &(q, n, a) in &spec.initial.0 {
        match (q, n) {
            (0, 0) => mu += a,
            (1, 0) => nu += a,
            _ => {}
        }
    }
    (mu, nu)
}

/// Sets a number at a dotted path. Every intermediate table must exist
/// except for the last key, which is created if missing.
pub fn set_path(doc: &mut Value, path: &str, value: f64) -> Result<()> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("bad parameter path `{path}`")));
    }
    let (last, parents) = keys.split_last().expect("nonempty");
    let mut cur = doc;
    for k in parents {
        cur = cur
            .get_mut(*k)
            .filter(|v| v.is_object())
            .ok_or_else(|| Error::Config(format!("parameter path `{path}`: no table `{k}`")))?;
    }
    let obj = cur.as_object_mut().expect("checked above");
    if let Some(old) = obj.get(*last) {
        if !(old.is_number() || old.is_null()) {
            return Err(Error::Config(format!("parameter `{path}` is not a scalar")));
        }
    }
    let num = serde_json::Number::from_f64(value)
        .ok_or_else(|| Error::Config(format!("parameter `{path}`: non-finite value")))?;
    let v = if parents.first() == Some(&"truncation") {
        if value.fract() != 0.0 || value < 0.0 {
            return Err(Error::Config(format!("parameter `{path}` must be a whole number")));
        }
        Value::from(value as u64)
    } else {
        Value::Number(num)
    };
    obj.insert(last.to_string(), v);
    Ok(())
}
