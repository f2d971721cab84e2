//! Distribution of the energy Z_F harvested by a node over the N downlink
//! slots of one frame.

use std::f64::consts::PI;

use crate::error::{domain, Result, WpcnError};
use crate::numerics::{clipped_erf, erf, erfinv, gamma_fn, gamma_ratio, ErfClipConfig};
use crate::params::NetworkParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDistribution {
    pub params: NetworkParams,
    pub n_dl: u32,
    /// c in the α = 4 tail erf(c/√z).
    pub c_coeff: f64,
}

impl EnergyDistribution {
    pub fn new(params: &NetworkParams, n_dl: u32) -> Result<Self> {
        params.validate()?;
        params.check_n_dl(n_dl)?;
        let gr = gamma_ratio(n_dl, params.alpha)?;
        let c_coeff = params.lambda_ap * gr / 2.0 * (PI.powi(3) * params.p_d * params.eta).sqrt();
        Ok(Self { params: *params, n_dl, c_coeff })
    }

    fn require_alpha4(&self) -> Result<()> {
        if self.params.alpha != 4.0 {
            return Err(WpcnError::UnsupportedAlpha(self.params.alpha));
        }
        Ok(())
    }

    /// πλ_AP·(Γ(N+2/α)/Γ(N))·Γ(1-2/α)·(P_D·η)^(2/α), the exponent of the
    /// Laplace transform per unit s^(2/α).
    fn laplace_scale(&self) -> Result<f64> {
        let p = &self.params;
        let delta = 2.0 / p.alpha;
        Ok(PI * p.lambda_ap * gamma_ratio(self.n_dl, p.alpha)? * gamma_fn(1.0 - delta) * (p.p_d * p.eta).powf(delta))
    }

    /// E[exp(-s·Z_F)].
    pub fn laplace_zf(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(domain(format!("Laplace argument must be nonnegative, got {s}")));
        }
        Ok((-self.laplace_scale()? * s.powf(2.0 / self.params.alpha)).exp())
    }

    /// P(Z_F ≥ z) for α = 4.
    pub fn ccdf_zf(&self, z: f64) -> Result<f64> {
        self.require_alpha4()?;
        if !(z >= 0.0) {
            return Err(domain(format!("energy level must be nonnegative, got {z}")));
        }
        Ok(self.ccdf_unchecked(z))
    }

    pub(crate) fn ccdf_unchecked(&self, z: f64) -> f64 {
        if z <= 0.0 {
            1.0
        } else {
            erf(self.c_coeff / z.sqrt())
        }
    }

    /// Inverse-CCDF sample: the z with P(Z_F ≥ z) = u.
    pub fn sample_zf(&self, u: f64) -> Result<f64> {
        self.require_alpha4()?;
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!("uniform variate must lie in (0,1), got {u}")));
        }
        let v = erfinv(u)?;
        Ok((self.c_coeff / v).powi(2))
    }

    /// Battery-free transmission probability P(Z_F ≥ P_U), with erf saturated
    /// at v_e.
    pub fn rho_free(&self, p_u: f64, cfg: &ErfClipConfig) -> Result<f64> {
        self.require_alpha4()?;
        if !(p_u > 0.0) {
            return Err(domain(format!("uplink power must be positive, got {p_u}")));
        }
        Ok(clipped_erf(self.c_coeff / p_u.sqrt(), cfg))
    }

    /// The Q > 0 with E[exp(-Q·Z_F)] = exp(-Q·P_U).
    pub fn chernoff_exponent(&self, p_u: f64) -> Result<f64> {
        if !(p_u > 0.0) {
            return Err(domain(format!("uplink power must be positive, got {p_u}")));
        }
        let alpha = self.params.alpha;
        Ok((self.laplace_scale()? / p_u).powf(alpha / (alpha - 2.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig5() -> EnergyDistribution {
        EnergyDistribution::new(&NetworkParams::reference(), 60).unwrap()
    }

    #[test]
    fn c_coeff_at_reference_point() {
        assert!((fig5().c_coeff - 0.0344339).abs() < 1e-6);
    }

    #[test]
    fn laplace_at_origin_and_empty_network() {
        let d = fig5();
        assert_eq!(d.laplace_zf(0.0).unwrap(), 1.0);
        let mut p = NetworkParams::reference();
        p.lambda_ap = 1e-300;
        let empty = EnergyDistribution::new(&p, 60).unwrap();
        assert!((empty.laplace_zf(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(d.laplace_zf(-1.0).is_err());
    }

    #[test]
    fn laplace_strictly_decreasing_and_log_linear_in_density() {
        let d = fig5();
        let mut prev = 1.0;
        for i in 1..50 {
            let v = d.laplace_zf(i as f64 * 0.3).unwrap();
            assert!(v < prev);
            prev = v;
        }
        let mut p = NetworkParams::reference();
        p.lambda_ap *= 3.0;
        let d3 = EnergyDistribution::new(&p, 60).unwrap();
        let ratio = d3.laplace_zf(2.0).unwrap().ln() / d.laplace_zf(2.0).unwrap().ln();
        assert!((ratio - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ccdf_examples() {
        let d = fig5();
        assert_eq!(d.ccdf_zf(0.0).unwrap(), 1.0);
        assert!(d.ccdf_zf(1e30).unwrap() < 1e-15);
        let v = d.ccdf_zf(0.02).unwrap();
        assert!((v - 0.26941).abs() < 1e-4);
        assert!((v - erf(0.0344339 / 0.02f64.sqrt())).abs() < 1e-6);
    }

    #[test]
    fn ccdf_rejects_other_alpha() {
        let mut p = NetworkParams::reference();
        p.alpha = 3.0;
        let d = EnergyDistribution::new(&p, 60).unwrap();
        assert!(matches!(d.ccdf_zf(0.1), Err(WpcnError::UnsupportedAlpha(_))));
        assert!(d.rho_free(0.1, &ErfClipConfig::default()).is_err());
        assert!(d.laplace_zf(1.0).is_ok());
    }

    #[test]
    fn ccdf_increases_with_downlink_slots() {
        let p = NetworkParams::reference();
        for &z in &[1e-4, 1e-3, 0.02, 0.5] {
            let mut prev = 0.0;
            for n in 1..99 {
                let v = EnergyDistribution::new(&p, n).unwrap().ccdf_zf(z).unwrap();
                assert!(v > prev);
                prev = v;
            }
        }
    }

    #[test]
    fn sample_inverts_ccdf() {
        let d = fig5();
        for &u in &[1e-6, 0.01, 0.3, 0.5, 0.9, 0.999_999] {
            let z = d.sample_zf(u).unwrap();
            assert!((d.ccdf_zf(z).unwrap() - u).abs() < 1e-12);
        }
        let near_one = d.sample_zf(1.0 - 1e-12).unwrap();
        assert!(near_one < d.sample_zf(0.999).unwrap() && near_one < 5e-5);
        assert!(d.sample_zf(1e-12).unwrap() > 1e18);
        assert!(d.sample_zf(0.0).is_err());
        assert!(d.sample_zf(1.0).is_err());
    }

    #[test]
    fn rho_free_examples() {
        let d = fig5();
        let cfg = ErfClipConfig::default();
        assert!((d.rho_free(1e-30, &cfg).unwrap() - 1.0).abs() < 1e-15);
        let r = d.rho_free(0.02, &cfg).unwrap();
        assert!((r - d.ccdf_zf(0.02).unwrap()).abs() < 1e-15);
        assert!((r - 0.27).abs() < 0.005);
        // c/√P_U = v_e exactly saturates
        let p_sat = (d.c_coeff / cfg.v_e).powi(2);
        assert_eq!(d.rho_free(p_sat * 0.999, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn chernoff_fixed_point_and_scaling() {
        let d = fig5();
        let q = d.chernoff_exponent(0.02).unwrap();
        assert!((q - 11.8569).abs() < 1e-3);
        let lhs = d.laplace_zf(q).unwrap();
        assert!((lhs - (-q * 0.02f64).exp()).abs() < 1e-10);

        // the α = 4 closed form P_D·η·[πλΓ(N+½)√π/(P_U·Γ(N))]²
        let p = NetworkParams::reference();
        let gr = gamma_ratio(60, 4.0).unwrap();
        let closed = p.p_d * p.eta * (PI * p.lambda_ap * gr * PI.sqrt() / 0.02).powi(2);
        assert!(((q - closed) / closed).abs() < 1e-12);

        let mut p2 = p;
        p2.lambda_ap *= 2.0;
        let q2 = EnergyDistribution::new(&p2, 60).unwrap().chernoff_exponent(0.02).unwrap();
        assert!((q2 / q - 4.0).abs() < 1e-12);
    }

    #[test]
    fn chernoff_fixed_point_general_alpha() {
        for &alpha in &[2.5, 3.0, 3.5, 4.0, 5.0] {
            for &lam in &[1e-4, 8e-4, 5e-3] {
                for &pu in &[1e-5, 1e-3, 0.05] {
                    let mut p = NetworkParams::reference();
                    p.alpha = alpha;
                    p.lambda_ap = lam;
                    let d = EnergyDistribution::new(&p, 20).unwrap();
                    let q = d.chernoff_exponent(pu).unwrap();
                    let res = d.laplace_zf(q).unwrap() - (-q * pu).exp();
                    assert!(res.abs() < 1e-10, "alpha {alpha} lam {lam} pu {pu}: {res}");
                }
            }
        }
    }
}
