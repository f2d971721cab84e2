use serde::{Deserialize, Serialize};

use crate::error::{Result, WpcnError};

/// Physical and protocol constants of the network.
///
/// Densities are per m², powers in W, and energy is measured in W times one
/// normalized slot, so power and energy are interchangeable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub lambda_ap: f64,
    pub lambda_w: f64,
    pub p_d: f64,
    pub eta: f64,
    pub alpha: f64,
    pub sigma2: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub t_slots: u32,
    pub p_max: f64,
}

impl NetworkParams {
    /// The numerical setting used throughout the evaluation: λ_AP = 8e-4,
    /// λ_w = 1.2e-3, P_D = 10 W, η = 0.4, α = 4, σ² = -60 dBm, β = 5,
    /// ε = 0.05, T = 100, P_max = 0.02 W.
    pub fn reference() -> Self {
        Self {
            lambda_ap: 0.0008,
            lambda_w: 0.0012,
            p_d: 10.0,
            eta: 0.4,
            alpha: 4.0,
            sigma2: dbm_to_watt(-60.0),
            beta: 5.0,
            epsilon: 0.05,
            t_slots: 100,
            p_max: 0.02,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_ap", self.lambda_ap),
            ("lambda_w", self.lambda_w),
            ("p_d", self.p_d),
            ("sigma2", self.sigma2),
            ("beta", self.beta),
            ("p_max", self.p_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(WpcnError::InvalidParams(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(WpcnError::InvalidParams(format!("eta must lie in (0,1), got {}", self.eta)));
        }
        if !(self.alpha.is_finite() && self.alpha > 2.0) {
            return Err(WpcnError::InvalidParams(format!("alpha must exceed 2, got {}", self.alpha)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(WpcnError::InvalidParams(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if self.t_slots < 2 {
            return Err(WpcnError::InvalidParams(format!("t_slots must be at least 2, got {}", self.t_slots)));
        }
        Ok(())
    }

    /// Checks `1 <= n_dl <= T-1`.
    pub fn check_n_dl(&self, n_dl: u32) -> Result<()> {
        if n_dl == 0 || n_dl >= self.t_slots {
            return Err(WpcnError::Domain(format!("downlink slots N = {n_dl} outside 1..={}", self.t_slots - 1)));
        }
        Ok(())
    }

    pub fn ul_slots(&self, n_dl: u32) -> f64 {
        f64::from(self.t_slots - n_dl)
    }
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * watt.log10() + 30.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_is_valid() {
        NetworkParams::reference().validate().unwrap();
    }

    #[test]
    fn minus_sixty_dbm_is_a_nanowatt() {
        assert!((dbm_to_watt(-60.0) - 1e-9).abs() < 1e-24);
        assert!((watt_to_dbm(1e-9) + 60.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_fields() {
        let mut p = NetworkParams::reference();
        p.epsilon = 1.5;
        assert!(p.validate().is_err());
        let mut p = NetworkParams::reference();
        p.alpha = 2.0;
        assert!(p.validate().is_err());
        let mut p = NetworkParams::reference();
        p.t_slots = 1;
        assert!(p.validate().is_err());
    }
}
