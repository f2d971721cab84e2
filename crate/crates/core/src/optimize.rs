//! Spatial throughput and the optimizers for battery-free, infinite-battery
//! and finite-battery nodes.

use rayon::prelude::*;
use serde::Serialize;

use crate::battery::{rho_lb_markov, BatteryMode, MarkovBoundConfig};
use crate::energy::EnergyDistribution;
use crate::error::{domain, Result, WpcnError};
use crate::numerics::{erfinv, ErfClipConfig};
use crate::params::NetworkParams;
use crate::uplink::{outage_equivalence, rho_constraint_ok, OutageEquivalence};

/// Rate exponent of the throughput model; fixed at 1.
pub const TAU: f64 = 1.0;

/// λ_w·ρ·log₂(1+β) in bps/Hz/m².
pub fn spatial_throughput(lambda_w: f64, rho: f64, beta: f64) -> f64 {
    lambda_w * rho * (1.0 + beta).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decision {
    pub n_dl: u32,
    pub p_u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    HighDensity,
    MediumDensity,
    LowDensity,
    InfiniteBattery,
    FiniteBattery,
}

/// All P_U in [p_lo, p_hi] are optimal at this N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerInterval {
    pub n_dl: u32,
    pub p_lo: f64,
    pub p_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationOutcome {
    pub feasible: bool,
    pub regime: Regime,
    pub best: Option<Decision>,
    pub throughput: f64,
    pub rho_at_best: f64,
    pub witness_region: Option<Vec<PowerInterval>>,
    pub n0: Option<u32>,
    pub notes: String,
}

impl OptimizationOutcome {
    fn infeasible(regime: Regime, notes: impl Into<String>) -> Self {
        Self {
            feasible: false,
            regime,
            best: None,
            throughput: 0.0,
            rho_at_best: 0.0,
            witness_region: None,
            n0: None,
            notes: notes.into(),
        }
    }
}

/// Network parameters together with the derived outage constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem {
    pub params: NetworkParams,
    pub eq: OutageEquivalence,
    pub clip: ErfClipConfig,
}

impl Problem {
    pub fn new(params: NetworkParams) -> Result<Self> {
        let eq = outage_equivalence(&params)?;
        Ok(Self { params, eq, clip: ErfClipConfig::default() })
    }

    /// Uses `p_min` instead of the formula value.
    pub fn with_p_min(self, p_min: f64) -> Result<Self> {
        if !(p_min > 0.0 && p_min <= self.params.p_max) {
            return Err(WpcnError::InfeasibleParams(format!(
                "P_min override {p_min} must lie in (0, P_max = {}]",
                self.params.p_max
            )));
        }
        Ok(Self { eq: self.eq.with_p_min(p_min), ..self })
    }

    pub fn with_clip(self, clip: ErfClipConfig) -> Self {
        Self { clip, ..self }
    }

    pub fn max_throughput(&self) -> f64 {
        spatial_throughput(self.params.lambda_w, 1.0, self.params.beta)
    }

    fn dist(&self, n_dl: u32) -> Result<EnergyDistribution> {
        EnergyDistribution::new(&self.params, n_dl)
    }

    pub fn rho_free(&self, n_dl: u32, p_u: f64) -> Result<f64> {
        self.dist(n_dl)?.rho_free(p_u, &self.clip)
    }

    fn throughput(&self, rho: f64) -> f64 {
        spatial_throughput(self.params.lambda_w, rho, self.params.beta)
    }

    /// Largest P_U at which the battery-free ρ is still exactly 1.
    pub fn rho1_power_cap(&self, n_dl: u32) -> Result<f64> {
        Ok((self.dist(n_dl)?.c_coeff / self.clip.v_e).powi(2))
    }

    /// Density regime of the battery-free problem.
    pub fn free_regime(&self) -> Regime {
        let p = &self.params;
        let k = self.eq.k_epsilon;
        if p.lambda_ap >= p.lambda_w / k {
            Regime::HighDensity
        } else if p.lambda_ap >= p.lambda_w / (k * f64::from(p.t_slots - 1)) {
            Regime::MediumDensity
        } else {
            Regime::LowDensity
        }
    }

    /// The N₀ ∈ {1,…,T-2} with K·λ_AP·(T-N₀-1) < λ_w ≤ K·λ_AP·(T-N₀).
    pub fn medium_n0(&self) -> Option<u32> {
        let p = &self.params;
        let kl = self.eq.k_epsilon * p.lambda_ap;
        let t = f64::from(p.t_slots);
        let holds = |n: u32| kl * (t - f64::from(n) - 1.0) < p.lambda_w && p.lambda_w <= kl * (t - f64::from(n));
        let guess = (t - p.lambda_w / kl).floor();
        if guess >= 1.0 && guess <= t - 2.0 && holds(guess as u32) {
            return Some(guess as u32);
        }
        (1..p.t_slots.saturating_sub(1)).find(|&n| holds(n))
    }

    /// Largest N for which ρ = 1 meets the density constraint.
    pub fn max_n_rho1(&self) -> Option<u32> {
        (1..self.params.t_slots).rev().find(|&n| rho_constraint_ok(&self.params, 1.0, n, &self.eq))
    }
}

/// Whether the battery-free erf saturates at (N, P_U), so that ρ = 1.
pub fn feasibility_rho1(params: &NetworkParams, n_dl: u32, p_u: f64, clip: &ErfClipConfig) -> Result<bool> {
    if params.alpha != 4.0 {
        return Err(WpcnError::UnsupportedAlpha(params.alpha));
    }
    let c = EnergyDistribution::new(params, n_dl)?.c_coeff;
    Ok(c / p_u.sqrt() >= clip.v_e)
}

/// Total order on candidates: larger R, then smaller P_U, then smaller N.
fn better(a: (f64, f64, u32), b: (f64, f64, u32)) -> bool {
    if a.0 != b.0 {
        return a.0 > b.0;
    }
    if a.1 != b.1 {
        return a.1 < b.1;
    }
    a.2 < b.2
}

fn rho1_region(problem: &Problem, n_top: u32) -> Result<Vec<PowerInterval>> {
    let p_min = problem.eq.p_min;
    let mut region = Vec::new();
    for n in 1..=n_top {
        let hi = problem.rho1_power_cap(n)?.min(problem.params.p_max);
        if hi >= p_min && feasibility_rho1(&problem.params, n, p_min, &problem.clip)? {
            region.push(PowerInterval { n_dl: n, p_lo: p_min, p_hi: hi });
        }
    }
    Ok(region)
}

fn saturated_or_corner(problem: &Problem, regime: Regime, n_top: u32, n0: Option<u32>) -> Result<OptimizationOutcome> {
    let p_min = problem.eq.p_min;
    if feasibility_rho1(&problem.params, n_top, p_min, &problem.clip)? {
        let region = rho1_region(problem, n_top)?;
        let first = region[0];
        return Ok(OptimizationOutcome {
            feasible: true,
            regime,
            best: Some(Decision { n_dl: first.n_dl, p_u: p_min }),
            throughput: problem.max_throughput(),
            rho_at_best: 1.0,
            witness_region: Some(region),
            n0,
            notes: format!("rho = 1 on the whole witness region, N up to {n_top}"),
        });
    }
    let rho = problem.rho_free(n_top, p_min)?;
    Ok(OptimizationOutcome {
        feasible: true,
        regime,
        best: Some(Decision { n_dl: n_top, p_u: p_min }),
        throughput: problem.throughput(rho),
        rho_at_best: rho,
        witness_region: None,
        n0,
        notes: format!("erf does not saturate at N = {n_top}, P_U = P_min"),
    })
}

/// Battery-free optimum, by density regime.
pub fn optimize_free(problem: &Problem) -> Result<OptimizationOutcome> {
    let p = &problem.params;
    if p.alpha != 4.0 {
        return Err(WpcnError::UnsupportedAlpha(p.alpha));
    }
    match problem.free_regime() {
        Regime::HighDensity => saturated_or_corner(problem, Regime::HighDensity, p.t_slots - 1, None),
        Regime::MediumDensity => {
            let n0 = problem.medium_n0().ok_or_else(|| domain("medium density regime without a valid N0"))?;
            saturated_or_corner(problem, Regime::MediumDensity, n0, Some(n0))
        }
        _ => low_density(problem),
    }
}

/// The low-density search: for each N whose constraint can be met at
/// P_max, place P_U where the constraint is tight (or at P_min).
fn low_density(problem: &Problem) -> Result<OptimizationOutcome> {
    let p = &problem.params;
    let eq = &problem.eq;
    if !rho_constraint_ok(p, problem.rho_free(1, p.p_max)?, 1, eq) {
        return Ok(OptimizationOutcome::infeasible(
            Regime::LowDensity,
            "density constraint fails at N = 1 even with P_U = P_max",
        ));
    }
    let mut best: Option<(f64, f64, u32, f64)> = None;
    for n in 1..p.t_slots {
        if !rho_constraint_ok(p, problem.rho_free(n, p.p_max)?, n, eq) {
            continue;
        }
        let target = eq.k_epsilon * p.lambda_ap * p.ul_slots(n) / p.lambda_w;
        let c = problem.dist(n)?.c_coeff;
        let p_s = (c / erfinv(target)?).powi(2);
        let pu = p_s.max(eq.p_min).min(p.p_max);
        let rho = problem.rho_free(n, pu)?;
        let r = problem.throughput(rho);
        if best.is_none_or(|b| better((r, pu, n), (b.0, b.1, b.2))) {
            best = Some((r, pu, n, rho));
        }
    }
    let (r, pu, n, rho) = best.expect("N = 1 passed the feasibility check");
    Ok(OptimizationOutcome {
        feasible: true,
        regime: Regime::LowDensity,
        best: Some(Decision { n_dl: n, p_u: pu }),
        throughput: r,
        rho_at_best: rho,
        witness_region: None,
        n0: None,
        notes: if pu > eq.p_min {
            "interior optimum: density constraint tight".into()
        } else {
            "optimum at P_min".into()
        },
    })
}

/// Infinite battery: ρ = 1, so any N up to the density limit and any
/// P_U in [P_min, P_max] is optimal.
pub fn feasible_region_infinite(problem: &Problem) -> OptimizationOutcome {
    let eq = &problem.eq;
    let Some(n_max) = problem.max_n_rho1() else {
        return OptimizationOutcome::infeasible(
            Regime::InfiniteBattery,
            "no N satisfies the density constraint at rho = 1",
        );
    };
    let region: Vec<PowerInterval> =
        (1..=n_max).map(|n| PowerInterval { n_dl: n, p_lo: eq.p_min, p_hi: problem.params.p_max }).collect();
    OptimizationOutcome {
        feasible: true,
        regime: Regime::InfiniteBattery,
        best: Some(Decision { n_dl: 1, p_u: eq.p_min }),
        throughput: problem.max_throughput(),
        rho_at_best: 1.0,
        witness_region: Some(region),
        n0: None,
        notes: format!("N in 1..={n_max}, P_U anywhere in [P_min, P_max]"),
    }
}

/// Finite battery restricted to ρ = 1: the infinite-battery region with P_U
/// additionally capped where the erf saturates.
pub fn feasible_region_finite_rho1(problem: &Problem) -> Result<OptimizationOutcome> {
    if problem.params.alpha != 4.0 {
        return Err(WpcnError::UnsupportedAlpha(problem.params.alpha));
    }
    let eq = &problem.eq;
    let Some(n_max) = problem.max_n_rho1() else {
        return Ok(OptimizationOutcome::infeasible(
            Regime::FiniteBattery,
            "no N satisfies the density constraint at rho = 1",
        ));
    };
    let mut region = Vec::new();
    for n in 1..=n_max {
        let hi = problem.rho1_power_cap(n)?.min(problem.params.p_max);
        if hi >= eq.p_min {
            region.push(PowerInterval { n_dl: n, p_lo: eq.p_min, p_hi: hi });
        }
    }
    let Some(first) = region.first().copied() else {
        return Ok(OptimizationOutcome::infeasible(
            Regime::FiniteBattery,
            "rho = 1 power cap is below P_min for every N",
        ));
    };
    Ok(OptimizationOutcome {
        feasible: true,
        regime: Regime::FiniteBattery,
        best: Some(Decision { n_dl: first.n_dl, p_u: eq.p_min }),
        throughput: problem.max_throughput(),
        rho_at_best: 1.0,
        witness_region: Some(region),
        n0: None,
        notes: String::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Uniform,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PowerGrid {
    pub kind: GridKind,
    pub points: usize,
}

impl PowerGrid {
    pub fn uniform(points: usize) -> Self {
        Self { kind: GridKind::Uniform, points }
    }

    pub fn geometric(points: usize) -> Self {
        Self { kind: GridKind::Geometric, points }
    }

    /// Grid over [lo, hi] with both ends included.
    pub fn values(&self, lo: f64, hi: f64) -> Result<Vec<f64>> {
        if self.points == 0 || !(lo > 0.0 && hi >= lo) {
            return Err(domain("power grid needs at least one point and 0 < lo <= hi"));
        }
        if self.points == 1 || hi == lo {
            return Ok(vec![lo]);
        }
        let m = (self.points - 1) as f64;
        let mut v: Vec<f64> = (0..self.points)
            .map(|i| {
                let t = i as f64 / m;
                match self.kind {
                    GridKind::Uniform => lo + (hi - lo) * t,
                    GridKind::Geometric => lo * (hi / lo).powf(t),
                }
            })
            .collect();
        v[0] = lo;
        v[self.points - 1] = hi;
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCell {
    pub n_dl: u32,
    pub p_u: f64,
    pub rho: f64,
    pub constraint_ok: bool,
    /// R, or 0 where the density constraint fails.
    pub throughput: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearch {
    pub outcome: OptimizationOutcome,
    pub cells: Vec<GridCell>,
}

fn grid_search<F>(problem: &Problem, regime: Regime, powers: &[f64], rho_at: F) -> Result<GridSearch>
where
    F: Fn(u32, f64) -> Result<f64> + Sync,
{
    let p = &problem.params;
    let pairs: Vec<(u32, f64)> = (1..p.t_slots).flat_map(|n| powers.iter().map(move |&pu| (n, pu))).collect();
    let cells = pairs
        .par_iter()
        .map(|&(n, pu)| {
            let rho = rho_at(n, pu)?;
            let ok = rho_constraint_ok(p, rho, n, &problem.eq);
            let throughput = if ok { problem.throughput(rho) } else { 0.0 };
            Ok(GridCell { n_dl: n, p_u: pu, rho, constraint_ok: ok, throughput })
        })
        .collect::<Result<Vec<_>>>()?;

    let best = cells
        .iter()
        .filter(|c| c.constraint_ok)
        .fold(None::<&GridCell>, |acc, c| match acc {
            Some(b) if !better((c.throughput, c.p_u, c.n_dl), (b.throughput, b.p_u, b.n_dl)) => Some(b),
            _ => Some(c),
        })
        .copied();
    let outcome = match best {
        None => OptimizationOutcome::infeasible(regime, "no grid point satisfies the density constraint"),
        Some(b) => OptimizationOutcome {
            feasible: true,
            regime,
            best: Some(Decision { n_dl: b.n_dl, p_u: b.p_u }),
            throughput: b.throughput,
            rho_at_best: b.rho,
            witness_region: None,
            n0: None,
            notes: format!("grid of {} powers x {} slot counts", powers.len(), p.t_slots - 1),
        },
    };
    Ok(GridSearch { outcome, cells })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteSearchConfig {
    pub n_power_grid: usize,
    pub markov: MarkovBoundConfig,
}

impl Default for FiniteSearchConfig {
    fn default() -> Self {
        Self { n_power_grid: 200, markov: MarkovBoundConfig::default() }
    }
}

/// Finite battery: Markov lower bound on ρ at every (N, P_U) of a uniform
/// grid over [P_min, P_max]; cells violating the density constraint count
/// as zero throughput. Powers above the capacity can never be sent.
pub fn optimize_finite(problem: &Problem, capacity: f64, cfg: &FiniteSearchConfig) -> Result<GridSearch> {
    if !(capacity >= problem.eq.p_min) {
        return Err(domain(format!("capacity {capacity} is below P_min = {}", problem.eq.p_min)));
    }
    let powers = PowerGrid::uniform(cfg.n_power_grid).values(problem.eq.p_min, problem.params.p_max)?;
    finite_grid(problem, capacity, &powers, &cfg.markov)
}

fn finite_grid(problem: &Problem, capacity: f64, powers: &[f64], markov: &MarkovBoundConfig) -> Result<GridSearch> {
    grid_search(problem, Regime::FiniteBattery, powers, |n, pu| {
        if pu > capacity {
            return Ok(0.0);
        }
        Ok(rho_lb_markov(&problem.params, n, pu, capacity, markov)?.rho)
    })
}

/// Exhaustive scan over every N and the power grid using the mode's ρ
/// model and the density constraint directly.
pub fn brute_force_oracle(problem: &Problem, mode: BatteryMode, grid: PowerGrid) -> Result<GridSearch> {
    let powers = grid.values(problem.eq.p_min, problem.params.p_max)?;
    match mode {
        BatteryMode::Free => grid_search(problem, problem.free_regime(), &powers, |n, pu| problem.rho_free(n, pu)),
        BatteryMode::Infinite => grid_search(problem, Regime::InfiniteBattery, &powers, |_, _| Ok(1.0)),
        BatteryMode::Finite { capacity } => finite_grid(problem, capacity, &powers, &MarkovBoundConfig::default()),
    }
}
