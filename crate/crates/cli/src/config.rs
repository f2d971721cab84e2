//! Run configuration: a JSON document with `network`, `protocol`,
//! `battery`, `simulation` and `sweeps` sections. Every physical quantity
//! names its unit, e.g. `{"dbm": -60}` or `{"watt": 1e-9}`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wpcn_core::battery::MarkovBoundConfig;
use wpcn_core::params::dbm_to_watt;
use wpcn_core::simcore::{HarvestModel, Mobility, SimConfig};
use wpcn_core::{BatteryMode, NetworkParams};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Power {
    Watt(f64),
    Milliwatt(f64),
    Microwatt(f64),
    Dbm(f64),
}

impl Power {
    pub fn watts(self) -> f64 {
        match self {
            Power::Watt(w) => w,
            Power::Milliwatt(mw) => mw / 1e3,
            Power::Microwatt(uw) => uw / 1e6,
            Power::Dbm(d) => dbm_to_watt(d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Density {
    PerM2(f64),
}

impl Density {
    pub fn per_m2(self) -> f64 {
        match self {
            Density::PerM2(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Length {
    M(f64),
}

impl Length {
    pub fn meters(self) -> f64 {
        match self {
            Length::M(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub lambda_ap: Density,
    pub lambda_w: Density,
    pub p_d: Power,
    pub eta: f64,
    pub alpha: f64,
    pub sigma2: Power,
    pub beta: f64,
    pub epsilon: f64,
    pub p_max: Power,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            lambda_ap: Density::PerM2(0.0008),
            lambda_w: Density::PerM2(0.0012),
            p_d: Power::Watt(10.0),
            eta: 0.4,
            alpha: 4.0,
            sigma2: Power::Dbm(-60.0),
            beta: 5.0,
            epsilon: 0.05,
            p_max: Power::Watt(0.02),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub t_slots: u32,
    pub n_dl: u32,
    pub p_u: Power,
    /// Replaces the computed P_min when set.
    pub p_min_override: Option<Power>,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self { t_slots: 100, n_dl: 60, p_u: Power::Watt(0.02), p_min_override: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Free,
    Finite,
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatterySection {
    pub kind: ModeKind,
    pub capacity: Power,
    pub delta0: Power,
    pub theta: f64,
    pub state_cap: usize,
    pub n_power_grid: usize,
}

impl Default for BatterySection {
    fn default() -> Self {
        Self {
            kind: ModeKind::Finite,
            capacity: Power::Watt(0.4),
            delta0: Power::Watt(1e-4),
            theta: 1e-3,
            state_cap: MarkovBoundConfig::default().state_cap,
            n_power_grid: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub window_side: Length,
    pub interim_side: Length,
    pub frames: u64,
    pub seed: u64,
    pub mobility: Mobility,
    pub harvest: HarvestModel,
    /// Wall-clock budget for simulation-backed commands.
    pub max_seconds: Option<f64>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            window_side: Length::M(1000.0),
            interim_side: Length::M(100.0),
            frames: 4000,
            seed: 1,
            mobility: Mobility::TypeI,
            harvest: HarvestModel::Spatial,
            max_seconds: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapScenario {
    pub interim_side: Length,
    pub p_u: Power,
}

/// Two-node independence experiment; the small-network setting is kept
/// apart from the `network`/`protocol` sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Sweep {
    pub lambda_ap: Vec<f64>,
    pub lambda_w: Density,
    pub t_slots: u32,
    pub n_dl: u32,
    pub scenarios: Vec<GapScenario>,
}

impl Default for Fig3Sweep {
    fn default() -> Self {
        Self {
            lambda_ap: vec![1e-4, 2e-4, 3e-4, 4e-4, 5e-4, 6e-4, 7e-4, 8e-4, 9e-4, 1e-3],
            lambda_w: Density::PerM2(0.005),
            t_slots: 3,
            n_dl: 2,
            scenarios: vec![
                GapScenario { interim_side: Length::M(20.0), p_u: Power::Microwatt(1.0) },
                GapScenario { interim_side: Length::M(100.0), p_u: Power::Microwatt(10.0) },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig4Sweep {
    pub sides: Vec<f64>,
    pub lambda_ap: Density,
    pub lambda_w: Density,
    pub t_slots: u32,
    pub n_dl: u32,
    pub p_u: Power,
}

impl Default for Fig4Sweep {
    fn default() -> Self {
        Self {
            sides: (1..=20).map(f64::from).collect(),
            lambda_ap: Density::PerM2(0.0005),
            lambda_w: Density::PerM2(0.005),
            t_slots: 3,
            n_dl: 2,
            p_u: Power::Microwatt(10.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig5Sweep {
    /// Battery capacities in W.
    pub capacity: Vec<f64>,
}

impl Default for Fig5Sweep {
    fn default() -> Self {
        Self { capacity: (2..=12).map(|k| f64::from(k) / 10.0).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig6Sweep {
    /// AP densities per m².
    pub lambda_ap: Vec<f64>,
    /// Node densities per m², one curve each.
    pub lambda_w: Vec<f64>,
}

impl Default for Fig6Sweep {
    fn default() -> Self {
        Self {
            lambda_ap: (0..=60).map(|i| 1e-4 * 10f64.powf(f64::from(i) / 20.0)).collect(),
            lambda_w: vec![0.0012, 0.002],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig7Sweep {
    pub capacity: Power,
    pub n_power_grid: usize,
}

impl Default for Fig7Sweep {
    fn default() -> Self {
        Self { capacity: Power::Watt(0.04), n_power_grid: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweeps {
    pub fig3: Fig3Sweep,
    pub fig4: Fig4Sweep,
    pub fig5: Fig5Sweep,
    pub fig6: Fig6Sweep,
    pub fig7: Fig7Sweep,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub network: NetworkSection,
    pub protocol: ProtocolSection,
    pub battery: BatterySection,
    pub simulation: SimulationSection,
    pub sweeps: Sweeps,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |e: wpcn_core::WpcnError| CliError::Config(e.to_string());
        let p = self.network_params();
        p.validate().map_err(invalid)?;
        p.check_n_dl(self.protocol.n_dl).map_err(invalid)?;
        self.sim_config().map_err(invalid)?;
        let b = &self.battery;
        if !(b.capacity.watts() > 0.0 && b.delta0.watts() > 0.0 && b.theta > 0.0 && b.n_power_grid >= 2) {
            return Err(CliError::Config(
                "battery needs capacity > 0, delta0 > 0, theta > 0 and n_power_grid >= 2".into(),
            ));
        }
        if !(self.protocol.p_u.watts() > 0.0) {
            return Err(CliError::Config("protocol.p_u must be positive".into()));
        }
        if let Some(p) = self.protocol.p_min_override {
            if !(p.watts() > 0.0) {
                return Err(CliError::Config("protocol.p_min_override must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn network_params(&self) -> NetworkParams {
        let n = &self.network;
        NetworkParams {
            lambda_ap: n.lambda_ap.per_m2(),
            lambda_w: n.lambda_w.per_m2(),
            p_d: n.p_d.watts(),
            eta: n.eta,
            alpha: n.alpha,
            sigma2: n.sigma2.watts(),
            beta: n.beta,
            epsilon: n.epsilon,
            t_slots: self.protocol.t_slots,
            p_max: n.p_max.watts(),
        }
    }

    pub fn battery_mode(&self, kind: ModeKind) -> BatteryMode {
        match kind {
            ModeKind::Free => BatteryMode::Free,
            ModeKind::Infinite => BatteryMode::Infinite,
            ModeKind::Finite => BatteryMode::Finite { capacity: self.battery.capacity.watts() },
        }
    }

    pub fn markov(&self) -> MarkovBoundConfig {
        MarkovBoundConfig {
            delta0: self.battery.delta0.watts(),
            theta: self.battery.theta,
            state_cap: self.battery.state_cap,
            ..MarkovBoundConfig::default()
        }
    }

    pub fn sim_config(&self) -> wpcn_core::Result<SimConfig> {
        let s = &self.simulation;
        let cfg = SimConfig {
            window_side: s.window_side.meters(),
            interim_side: s.interim_side.meters(),
            frames: s.frames,
            seed: s.seed,
            mobility: s.mobility,
            mode: self.battery_mode(self.battery.kind),
            harvest: s.harvest,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_reference_setting() {
        let cfg = Config::from_json("{}").unwrap();
        assert_eq!(cfg.network_params(), NetworkParams::reference());
    }

    #[test]
    fn units_are_converted() {
        assert!((Power::Dbm(-60.0).watts() - 1e-9).abs() < 1e-24);
        assert_eq!(Power::Microwatt(10.0).watts(), 1e-5);
        let cfg = Config::from_json(r#"{"network": {"sigma2": {"watt": 2e-9}}}"#).unwrap();
        assert_eq!(cfg.network_params().sigma2, 2e-9);
    }

    #[test]
    fn bare_numbers_for_physical_quantities_are_rejected() {
        assert!(matches!(Config::from_json(r#"{"network": {"sigma2": 1e-9}}"#), Err(CliError::Config(_))));
        assert!(Config::from_json(r#"{"network": {"sigma2": {"furlong": 1}}}"#).is_err());
    }

    #[test]
    fn out_of_range_epsilon_is_a_config_error() {
        let err = Config::from_json(r#"{"network": {"epsilon": 1.5}}"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn digest_tracks_content() {
        let a = Config::default();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.simulation.seed = 2;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}
