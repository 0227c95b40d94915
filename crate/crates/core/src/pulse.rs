//! Piecewise coupling envelopes g(t) with a fixed signed area.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const AREA_TOL: f64 = 1e-9;
/// Default length of each sin² ramp.
pub const DEFAULT_RAMP: f64 = 2e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    Constant,
    /// g_peak sin²(πt/2T)
    Sin2RampUp,
    /// g_peak cos²(πt/2T)
    Sin2RampDown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub shape: Shape,
    pub duration: f64,
    pub g_peak: f64,
}

impl Segment {
    pub fn area(&self) -> f64 {
        match self.shape {
            Shape::Constant => self.g_peak * self.duration,
            Shape::Sin2RampUp | Shape::Sin2RampDown => 0.5 * self.g_peak * self.duration,
        }
    }

    /// Envelope at local time `t` ∈ [0, duration].
    pub fn value(&self, t: f64) -> f64 {
        match self.shape {
            Shape::Constant => self.g_peak,
            Shape::Sin2RampUp => self.g_peak * (0.5 * PI * t / self.duration).sin().powi(2),
            Shape::Sin2RampDown => self.g_peak * (0.5 * PI * t / self.duration).cos().powi(2),
        }
    }
}

/// How the coupling is switched on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PulseShape {
    Square,
    Ramped { ramp_time: f64 },
}

impl Default for PulseShape {
    fn default() -> Self {
        PulseShape::Ramped {
            ramp_time: DEFAULT_RAMP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub segments: Vec<Segment>,
    pub target_area: f64,
}

impl PulseSchedule {
    /// Empty schedule: no evolution time, zero area.
    pub fn empty() -> Self {
        Self {
            segments: Vec::new(),
            target_area: 0.0,
        }
    }

    /// Coupling held at zero for `duration`.
    pub fn idle(duration: f64) -> Result<Self> {
        if !(duration >= 0.0) {
            return Err(Error::param("duration", "must be >= 0"));
        }
        Ok(Self {
            segments: vec![Segment {
                shape: Shape::Constant,
                duration,
                g_peak: 0.0,
            }],
            target_area: 0.0,
        })
    }

    /// Constant coupling for |area/g_peak|.
    pub fn square(target_area: f64, g_peak: f64) -> Result<Self> {
        check_signs(target_area, g_peak)?;
        if target_area == 0.0 {
            return Ok(Self::empty());
        }
        Self::from_segments(
            vec![Segment {
                shape: Shape::Constant,
                duration: target_area / g_peak,
                g_peak,
            }],
            target_area,
        )
    }

    /// sin² ramp up, constant plateau, sin² ramp down. The plateau length is
    /// solved for the area; if the area is too small for two full ramps the
    /// ramps are shortened and the plateau dropped.
    pub fn ramped(target_area: f64, g_peak: f64, ramp_time: f64) -> Result<Self> {
        check_signs(target_area, g_peak)?;
        if !(ramp_time > 0.0) {
            return Err(Error::param("ramp_time", "must be > 0"));
        }
        if target_area == 0.0 {
            return Ok(Self::empty());
        }
        let full = target_area / g_peak;
        let (ramp, plateau) = if full > ramp_time {
            (ramp_time, full - ramp_time)
        } else {
            (full, 0.0)
        };
        let mut segments = vec![Segment {
            shape: Shape::Sin2RampUp,
            duration: ramp,
            g_peak,
        }];
        if plateau > 0.0 {
            segments.push(Segment {
                shape: Shape::Constant,
                duration: plateau,
                g_peak,
            });
        }
        segments.push(Segment {
            shape: Shape::Sin2RampDown,
            duration: ramp,
            g_peak,
        });
        Self::from_segments(segments, target_area)
    }

    pub fn build(shape: PulseShape, target_area: f64, g_peak: f64) -> Result<Self> {
        match shape {
            PulseShape::Square => Self::square(target_area, g_peak),
            PulseShape::Ramped { ramp_time } => Self::ramped(target_area, g_peak, ramp_time),
        }
    }

    pub fn from_segments(segments: Vec<Segment>, target_area: f64) -> Result<Self> {
        if segments.iter().any(|s| !(s.duration >= 0.0) || !s.g_peak.is_finite()) {
            return Err(Error::param("segments", "durations must be >= 0 and peaks finite"));
        }
        let s = Self {
            segments,
            target_area,
        };
        let area = s.area();
        if (area - target_area).abs() > AREA_TOL {
            return Err(Error::param(
                "target_area",
                format!("segments integrate to {area}, target {target_area}"),
            ));
        }
        Ok(s)
    }

    pub fn area(&self) -> f64 {
        self.segments.iter().fold(0.0, |acc, s| acc + s.area())
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().fold(0.0, |acc, s| acc + s.duration)
    }

    pub fn peak(&self) -> f64 {
        self.segments.iter().map(|s| s.g_peak.abs()).fold(0.0, f64::max)
    }

    /// Segment boundaries, starting at 0.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = vec![0.0];
        for s in &self.segments {
            t += s.duration;
            out.push(t);
        }
        out
    }

    /// g(t); zero outside the schedule.
    pub fn envelope(&self, t: f64) -> f64 {
        let mut start = 0.0;
        for s in &self.segments {
            let end = start + s.duration;
            if t >= start && t <= end {
                return s.value(t - start);
            }
            start = end;
        }
        0.0
    }

    /// Envelope scaled by a constant factor, segment durations unchanged.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    g_peak: s.g_peak * factor,
                    ..*s
                })
                .collect(),
            target_area: self.target_area * factor,
        }
    }
}

fn check_signs(area: f64, g_peak: f64) -> Result<()> {
    if !area.is_finite() {
        return Err(Error::param("target_area", "must be finite"));
    }
    if area != 0.0 && (g_peak == 0.0 || area.signum() != g_peak.signum()) {
        return Err(Error::param(
            "g_peak",
            format!("peak coupling {g_peak} cannot produce area {area}"),
        ));
    }
    Ok(())
}
