//! Uplink SINR success probability and the ε-outage constraint.

use std::f64::consts::PI;

use crate::error::{domain, Result, WpcnError};
use crate::numerics::{find_root, gaussian_q, integrate_semi_infinite, qe, Tolerance};
use crate::params::NetworkParams;

/// λ_w·ρ/(T-N): density of nodes transmitting in one uplink slot.
pub fn active_density(lambda_w: f64, rho: f64, t_slots: u32, n_dl: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(domain(format!("rho must lie in [0,1], got {rho}")));
    }
    if n_dl == 0 || n_dl >= t_slots {
        return Err(domain(format!("N = {n_dl} must lie in 1..T-1 with T = {t_slots}")));
    }
    Ok(lambda_w * rho / f64::from(t_slots - n_dl))
}

/// β^(2/α)·∫₀^∞ du/(1+u^(α/2)) in closed form.
pub fn kappa(beta: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(domain(format!("alpha must exceed 2, got {alpha}")));
    }
    let delta = 2.0 / alpha;
    Ok(beta.powf(delta) * PI * delta / (PI * delta).sin())
}

/// κ by quadrature of β^(2/α)·∫₀^∞ du/(1+u^(α/2)). With u = e^s both
/// halves of the line have exponential tails.
pub fn kappa_quadrature(beta: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(domain(format!("alpha must exceed 2, got {alpha}")));
    }
    let h = alpha / 2.0;
    let tol = Tolerance { abs_tol: 1e-15, rel_tol: 1e-13, max_iter: 400 };
    let right = integrate_semi_infinite(|s| (s - h * s).exp() / ((-h * s).exp() + 1.0), &tol)?;
    let left = integrate_semi_infinite(|s| (-s).exp() / (1.0 + (-h * s).exp()), &tol)?;
    Ok(beta.powf(2.0 / alpha) * (left + right))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsucTerms {
    pub kappa: f64,
    pub a: f64,
    pub b: f64,
    pub g_term: f64,
    pub upsilon: f64,
}

impl PsucTerms {
    pub fn new(params: &NetworkParams, rho: f64, n_dl: u32, p_u: f64) -> Result<Self> {
        if !(p_u > 0.0) {
            return Err(domain(format!("uplink power must be positive, got {p_u}")));
        }
        let lambda_a = active_density(params.lambda_w, rho, params.t_slots, n_dl)?;
        let kappa = kappa(params.beta, params.alpha)?;
        let a = PI * kappa * lambda_a + PI * params.lambda_ap;
        let b = params.beta * params.sigma2 / p_u;
        let g_term = PI.powf(1.5) * (params.beta * params.sigma2).powf(-0.5) * params.lambda_ap * p_u.sqrt();
        // Υ = a/√(2b); at α = 4 this is G/√(2π) + π²√P_U·λ_a/(2√(2σ²))
        let upsilon = a / (2.0 * b).sqrt();
        Ok(Self { kappa, a, b, g_term, upsilon })
    }
}

/// πλ_AP·∫₀^∞ exp(-a·x - b·x^(α/2)) dx by quadrature, any α > 2.
pub fn psuc_general(params: &NetworkParams, rho: f64, n_dl: u32, p_u: f64) -> Result<f64> {
    let t = PsucTerms::new(params, rho, n_dl, p_u)?;
    let half_alpha = params.alpha / 2.0;
    let tol = Tolerance { abs_tol: 1e-16, rel_tol: 1e-11, max_iter: 400 };
    let integral = integrate_semi_infinite(|x| (-t.a * x - t.b * x.powf(half_alpha)).exp(), &tol)?;
    Ok((PI * params.lambda_ap * integral).min(1.0))
}

/// Closed form G·exp(Υ²/2)·Q(Υ) for α = 4.
pub fn psuc_closed4(params: &NetworkParams, rho: f64, n_dl: u32, p_u: f64) -> Result<f64> {
    if params.alpha != 4.0 {
        return Err(WpcnError::UnsupportedAlpha(params.alpha));
    }
    let t = PsucTerms::new(params, rho, n_dl, p_u)?;
    Ok((t.g_term * qe(t.upsilon)).min(1.0))
}

/// Root of g·Q(g/(2π)) = (1-ε)·exp(-g²/(4π)) on [1e-9, 50].
pub fn g0_solve(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    find_root(|g| g0_residual(g, epsilon), 1e-9, 50.0, &Tolerance::default())
}

pub fn g0_residual(g: f64, epsilon: f64) -> f64 {
    g * gaussian_q(g / (2.0 * PI)) - (1.0 - epsilon) * (-g * g / (4.0 * PI)).exp()
}

/// Constants that turn the outage constraint into a bound on λ_w·ρ.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OutageEquivalence {
    pub k_epsilon: f64,
    pub g0: f64,
    pub p_min: f64,
}

impl OutageEquivalence {
    /// Replaces the formula P_min by a given value, e.g. under a different
    /// noise calibration.
    pub fn with_p_min(self, p_min: f64) -> Self {
        Self { p_min, ..self }
    }
}

pub fn outage_equivalence(params: &NetworkParams) -> Result<OutageEquivalence> {
    params.validate()?;
    let k_epsilon = 2.0 * params.epsilon / (1.0 - params.epsilon) * params.beta.powf(-0.5) / PI;
    let g0 = g0_solve(params.epsilon)?;
    let p_min = g0 * g0 * params.beta * params.sigma2 / (PI.powi(3) * params.lambda_ap.powi(2));
    if p_min > params.p_max {
        return Err(WpcnError::InfeasibleParams(format!(
            "minimum uplink power {p_min:.6e} W exceeds P_max = {:.6e} W",
            params.p_max
        )));
    }
    Ok(OutageEquivalence { k_epsilon, g0, p_min })
}

/// Relative slack on the density inequality so that a ρ placed exactly on
/// the boundary is not rejected by rounding.
const BOUNDARY_SLACK: f64 = 1e-12;

pub fn rho_constraint_ok(params: &NetworkParams, rho: f64, n_dl: u32, eq: &OutageEquivalence) -> bool {
    let rhs = eq.k_epsilon * params.lambda_ap * params.ul_slots(n_dl);
    params.lambda_w * rho <= rhs * (1.0 + BOUNDARY_SLACK)
}

pub fn constraint_ok(params: &NetworkParams, rho: f64, n_dl: u32, p_u: f64, eq: &OutageEquivalence) -> bool {
    n_dl >= 1
        && n_dl < params.t_slots
        && rho_constraint_ok(params, rho, n_dl, eq)
        && p_u >= eq.p_min
        && p_u <= params.p_max
}

/// Density of the distance to the nearest AP.
pub fn distance_pdf(lambda_ap: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    2.0 * PI * lambda_ap * r * (-lambda_ap * PI * r * r).exp()
}
