//! Simulator for a Majorana-wire qubit coupled to a magnetized
//! nanomechanical resonator through a flux phase controller.
//!
//! Layers, bottom-up: the device chain ([`device`], [`gap`],
//! [`correlations`]) produces the rates and couplings; [`ops`] holds the
//! dense operator algebra; [`dynamics`] assembles and integrates the
//! master equations; [`protocols`] runs the pulse protocols and gate
//! checks; [`sweep`] and [`config`] drive parameter studies.

pub mod config;
pub mod correlations;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod gap;
pub mod gates;
pub mod ops;
pub mod output;
pub mod protocols;
pub mod pulse;
pub mod roots;
pub mod sweep;
pub mod units;

pub use device::{couplings, CouplingOverrides, DerivedCouplings, DeviceParams, RateConvention};
pub use error::{Error, Result};
