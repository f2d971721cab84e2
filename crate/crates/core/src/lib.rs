//! Stochastic-geometry model of a wireless powered communication network
//! running a harvest-then-transmit protocol: harvested-energy statistics,
//! uplink success probability, battery transmission probabilities, spatial
//! throughput optimizers, and a Monte Carlo engine to check them.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod battery;
pub mod energy;
pub mod error;
pub mod numerics;
pub mod optimize;
pub mod params;
pub mod simcore;
pub mod uplink;

pub use battery::BatteryMode;
pub use energy::EnergyDistribution;
pub use error::{Result, WpcnError};
pub use numerics::{ErfClipConfig, Tolerance};
pub use optimize::{Decision, OptimizationOutcome, Problem, Regime};
pub use params::NetworkParams;
pub use simcore::{HarvestModel, Mobility, SimConfig};
pub use uplink::OutageEquivalence;
