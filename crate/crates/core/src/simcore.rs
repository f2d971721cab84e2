//! Monte Carlo engine: Poisson fields, node mobility, per-frame harvesting,
//! battery recursions and the link-level checks of the analytic model.
//!
//! Every frame draws from its own ChaCha stream keyed by (seed, frame), and
//! all reductions are integer counts, so results do not depend on how rayon
//! schedules the work.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::battery::BatteryMode;
use crate::energy::EnergyDistribution;
use crate::error::{domain, Result, WpcnError};
use crate::numerics::ErfClipConfig;
use crate::params::NetworkParams;
use crate::uplink::active_density;

/// Distances below this are clamped in the simulated path loss (m).
pub const CLAMP_DISTANCE: f64 = 0.1;

/// Upper bound on the probability that an AP falls inside the clamp disk
/// around a given node.
pub fn clamp_bias_bound(lambda_ap: f64) -> f64 {
    lambda_ap * std::f64::consts::PI * CLAMP_DISTANCE * CLAMP_DISTANCE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mobility {
    /// Nodes relocate every frame; the AP field is a fresh realization.
    TypeI,
    /// Nodes stay put; the same number of APs relocates every frame.
    TypeII,
    /// Nodes stay put; the AP field is a fresh realization every frame.
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarvestModel {
    /// Sum over a simulated AP field.
    Spatial,
    /// I.i.d. draws from the analytic distribution of Z_F.
    FastOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub window_side: f64,
    pub interim_side: f64,
    pub frames: u64,
    pub seed: u64,
    pub mobility: Mobility,
    pub mode: BatteryMode,
    pub harvest: HarvestModel,
}

impl SimConfig {
    /// 1000 m window, Type-I mobility, battery-free, spatial harvesting.
    pub fn new(interim_side: f64, frames: u64, seed: u64) -> Result<Self> {
        let cfg = Self {
            window_side: 1000.0,
            interim_side,
            frames,
            seed,
            mobility: Mobility::TypeI,
            mode: BatteryMode::Free,
            harvest: HarvestModel::Spatial,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.interim_side > 0.0 && self.interim_side < self.window_side) {
            return Err(WpcnError::InvalidParams(format!(
                "interim side {} must lie in (0, window side {})",
                self.interim_side, self.window_side
            )));
        }
        if self.frames == 0 {
            return Err(WpcnError::InvalidParams("frames must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_window(self, window_side: f64) -> Result<Self> {
        let cfg = Self { window_side, ..self };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_mobility(self, mobility: Mobility) -> Self {
        Self { mobility, ..self }
    }

    pub fn with_mode(self, mode: BatteryMode) -> Self {
        Self { mode, ..self }
    }

    pub fn with_harvest(self, harvest: HarvestModel) -> Self {
        Self { harvest, ..self }
    }

    fn center(&self) -> Point {
        Point { x: self.window_side / 2.0, y: self.window_side / 2.0 }
    }

    /// Lower-left corner of the interim square, which is centred in the window.
    fn interim_origin(&self) -> Point {
        let o = (self.window_side - self.interim_side) / 2.0;
        Point { x: o, y: o }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Points in the square [0, side]².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub side: f64,
    pub points: Vec<Point>,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points in the axis-aligned square of side `l` with lower-left corner `origin`.
    pub fn count_in_square(&self, origin: Point, l: f64) -> usize {
        self.points
            .iter()
            .filter(|p| p.x >= origin.x && p.x < origin.x + l && p.y >= origin.y && p.y < origin.y + l)
            .count()
    }
}

/// RNG for one frame (or one entity) of a run.
pub fn frame_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// stream reserved for quantities drawn once per run
const SETUP_STREAM: u64 = u64::MAX;

fn uniform_points<R: Rng + ?Sized>(rng: &mut R, n: usize, origin: Point, side: f64) -> Vec<Point> {
    (0..n)
        .map(|_| Point { x: origin.x + side * rng.random::<f64>(), y: origin.y + side * rng.random::<f64>() })
        .collect()
}

fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> Result<usize> {
    if mean == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(mean).map_err(|e| domain(format!("Poisson mean {mean}: {e}")))?;
    Ok(d.sample(rng) as usize)
}

/// Homogeneous PPP on [0, side]²: a Poisson count, then uniform positions.
pub fn gen_ppp<R: Rng + ?Sized>(rng: &mut R, lambda: f64, side: f64) -> Result<PointSet> {
    if !(lambda > 0.0) || !(side >= 0.0) {
        return Err(domain(format!("PPP needs lambda > 0 and side >= 0, got {lambda}, {side}")));
    }
    let n = poisson_count(rng, lambda * side * side)?;
    Ok(PointSet { side, points: uniform_points(rng, n, Point { x: 0.0, y: 0.0 }, side) })
}

/// Relocates every point independently and uniformly in the window.
pub fn displace<R: Rng + ?Sized>(points: &PointSet, rng: &mut R) -> PointSet {
    PointSet { side: points.side, points: uniform_points(rng, points.len(), Point { x: 0.0, y: 0.0 }, points.side) }
}

fn erlang(n_dl: u32) -> Gamma<f64> {
    Gamma::new(f64::from(n_dl), 1.0).expect("shape N >= 1 and unit scale are valid")
}

/// Energy a node at `node` collects over N downlink slots: each AP adds
/// η·P_D·d^(-α) times an Erlang(N, 1) fading sum.
pub fn harvest_frame<R: Rng + ?Sized>(
    rng: &mut R,
    node: Point,
    aps: &PointSet,
    n_dl: u32,
    params: &NetworkParams,
) -> f64 {
    let fading = erlang(n_dl);
    let scale = params.eta * params.p_d;
    aps.points
        .iter()
        .map(|ap| {
            let d = node.dist(ap).max(CLAMP_DISTANCE);
            scale * d.powf(-params.alpha) * fading.sample(rng)
        })
        .sum()
}

/// Per-frame geometry shared by the spatial experiments.
struct Scene {
    cfg: SimConfig,
    params: NetworkParams,
    fixed_nodes: Vec<Point>,
    fixed_ap_count: usize,
}

impl Scene {
    fn new(cfg: SimConfig, params: NetworkParams, tagged: usize) -> Result<Self> {
        cfg.validate()?;
        params.validate()?;
        let mut rng = frame_rng(cfg.seed, SETUP_STREAM);
        let fixed_nodes = uniform_points(&mut rng, tagged, cfg.interim_origin(), cfg.interim_side);
        let fixed_ap_count = poisson_count(&mut rng, params.lambda_ap * cfg.window_side * cfg.window_side)?;
        Ok(Self { cfg, params, fixed_nodes, fixed_ap_count })
    }

    fn aps<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PointSet> {
        let side = self.cfg.window_side;
        match self.cfg.mobility {
            Mobility::TypeII => {
                Ok(PointSet { side, points: uniform_points(rng, self.fixed_ap_count, Point { x: 0.0, y: 0.0 }, side) })
            }
            Mobility::TypeI | Mobility::Static => gen_ppp(rng, self.params.lambda_ap, side),
        }
    }

    fn tagged<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Point> {
        match self.cfg.mobility {
            Mobility::TypeI => {
                uniform_points(rng, self.fixed_nodes.len(), self.cfg.interim_origin(), self.cfg.interim_side)
            }
            Mobility::TypeII | Mobility::Static => self.fixed_nodes.clone(),
        }
    }
}

/// Harvested energy of one node per frame, `frames` values in frame order.
pub fn harvest_series(cfg: &SimConfig, params: &NetworkParams, n_dl: u32) -> Result<Vec<f64>> {
    params.check_n_dl(n_dl)?;
    match cfg.harvest {
        HarvestModel::FastOracle => {
            cfg.validate()?;
            let dist = EnergyDistribution::new(params, n_dl)?;
            (0..cfg.frames).into_par_iter().map(|f| dist.sample_zf(frame_rng(cfg.seed, f).sample(Open01))).collect()
        }
        HarvestModel::Spatial => {
            let scene = Scene::new(*cfg, *params, 1)?;
            (0..cfg.frames)
                .into_par_iter()
                .map(|f| {
                    let mut rng = frame_rng(cfg.seed, f);
                    let aps = scene.aps(&mut rng)?;
                    let node = scene.tagged(&mut rng)[0];
                    Ok(harvest_frame(&mut rng, node, &aps, n_dl, params))
                })
                .collect()
        }
    }
}

/// Empirical transmission probability: the fraction of frames whose
/// available energy S_F meets P_U, starting from an empty battery.
pub fn run_battery_frames(cfg: &SimConfig, params: &NetworkParams, n_dl: u32, p_u: f64) -> Result<f64> {
    if !(p_u > 0.0) {
        return Err(domain(format!("uplink power must be positive, got {p_u}")));
    }
    let z = harvest_series(cfg, params, n_dl)?;
    let mut s = 0.0_f64;
    let mut hits = 0u64;
    for zf in z {
        let spent = if s >= p_u { p_u } else { 0.0 };
        s = match cfg.mode {
            BatteryMode::Free => zf,
            BatteryMode::Finite { capacity } => (s - spent + zf).min(capacity),
            BatteryMode::Infinite => s - spent + zf,
        };
        if s >= p_u {
            hits += 1;
        }
    }
    Ok(hits as f64 / cfg.frames as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndependenceGap {
    pub p1: f64,
    pub p2: f64,
    pub joint: f64,
    pub gap: f64,
}

/// Two tagged nodes inside the interim square, battery-free: compares
/// P(Z₁ ≥ P_U)·P(Z₂ ≥ P_U) with P(Z₁ ≥ P_U, Z₂ ≥ P_U).
pub fn independence_gap(cfg: &SimConfig, params: &NetworkParams, n_dl: u32, p_u: f64) -> Result<IndependenceGap> {
    params.check_n_dl(n_dl)?;
    let scene = Scene::new(*cfg, *params, 2)?;
    let counts = (0..cfg.frames)
        .into_par_iter()
        .map(|f| {
            let mut rng = frame_rng(cfg.seed, f);
            let aps = scene.aps(&mut rng)?;
            let nodes = scene.tagged(&mut rng);
            let a = harvest_frame(&mut rng, nodes[0], &aps, n_dl, params) >= p_u;
            let b = harvest_frame(&mut rng, nodes[1], &aps, n_dl, params) >= p_u;
            Ok([u64::from(a), u64::from(b), u64::from(a && b)])
        })
        .try_reduce(|| [0; 3], |x, y| Ok([x[0] + y[0], x[1] + y[1], x[2] + y[2]]))?;
    let n = cfg.frames as f64;
    let (p1, p2, joint) = (counts[0] as f64 / n, counts[1] as f64 / n, counts[2] as f64 / n);
    Ok(IndependenceGap { p1, p2, joint, gap: (p1 * p2 - joint).abs() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VoidPoint {
    pub side: f64,
    pub empirical: f64,
    pub analytic: f64,
}

/// Void probability of the active transmitters in one UL slot, over
/// squares of side L centred in the window, against exp(-λ_a·L²).
///
/// Nodes are only generated inside the largest square; each harvests from
/// the full AP field, transmits if Z_F ≥ P_U, and picks the observed slot
/// with probability 1/(T-N).
pub fn void_probability(
    cfg: &SimConfig,
    params: &NetworkParams,
    n_dl: u32,
    p_u: f64,
    l_grid: &[f64],
) -> Result<Vec<VoidPoint>> {
    params.check_n_dl(n_dl)?;
    let scene = Scene::new(*cfg, *params, 0)?;
    let l_max = l_grid.iter().copied().fold(0.0_f64, f64::max);
    if l_grid.iter().any(|&l| !(l >= 0.0)) || l_max >= cfg.window_side {
        return Err(domain("void-probability sides must lie in [0, window side)"));
    }
    let center = cfg.center();
    let corner = |l: f64| Point { x: center.x - l / 2.0, y: center.y - l / 2.0 };
    let slot_p = 1.0 / params.ul_slots(n_dl);
    let voids = (0..cfg.frames)
        .into_par_iter()
        .map(|f| {
            let mut rng = frame_rng(cfg.seed, f);
            let aps = scene.aps(&mut rng)?;
            let n = poisson_count(&mut rng, params.lambda_w * l_max * l_max)?;
            let nodes = uniform_points(&mut rng, n, corner(l_max), l_max);
            let active: Vec<Point> = nodes
                .into_iter()
                .filter(|&x| {
                    let on = harvest_frame(&mut rng, x, &aps, n_dl, params) >= p_u;
                    let slot = rng.random::<f64>() < slot_p;
                    on && slot
                })
                .collect();
            let set = PointSet { side: cfg.window_side, points: active };
            Ok(l_grid.iter().map(|&l| u64::from(set.count_in_square(corner(l), l) == 0)).collect::<Vec<u64>>())
        })
        .try_reduce(|| vec![0; l_grid.len()], |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()))?;
    let rho = EnergyDistribution::new(params, n_dl)?.rho_free(p_u, &ErfClipConfig::default())?;
    let lambda_a = active_density(params.lambda_w, rho, params.t_slots, n_dl)?;
    Ok(l_grid
        .iter()
        .zip(voids)
        .map(|(&l, v)| VoidPoint {
            side: l,
            empirical: v as f64 / cfg.frames as f64,
            analytic: (-lambda_a * l * l).exp(),
        })
        .collect())
}

/// Fraction of trials in which the SINR at the AP serving a typical node in
/// the window centre reaches β. Interferers form a PPP of density
/// λ_w·ρ/(T-N); all links see unit-mean Rayleigh fading. Uses
/// `cfg.frames` trials.
pub fn empirical_psuc(cfg: &SimConfig, params: &NetworkParams, rho: f64, n_dl: u32, p_u: f64) -> Result<f64> {
    cfg.validate()?;
    params.validate()?;
    if !(p_u > 0.0) {
        return Err(domain(format!("uplink power must be positive, got {p_u}")));
    }
    let lambda_a = active_density(params.lambda_w, rho, params.t_slots, n_dl)?;
    let typical = cfg.center();
    let side = cfg.window_side;
    let wins: u64 = (0..cfg.frames)
        .into_par_iter()
        .map(|f| {
            let mut rng = frame_rng(cfg.seed, f);
            let aps = gen_ppp(&mut rng, params.lambda_ap, side)?;
            let Some(ap) = aps.points.iter().min_by(|a, b| typical.dist(a).total_cmp(&typical.dist(b))).copied() else {
                return Ok(0);
            };
            let signal = p_u * rng.sample::<f64, _>(Exp1) * typical.dist(&ap).max(CLAMP_DISTANCE).powf(-params.alpha);
            let interference: f64 = if lambda_a > 0.0 {
                gen_ppp(&mut rng, lambda_a, side)?
                    .points
                    .iter()
                    .map(|y| p_u * rng.sample::<f64, _>(Exp1) * y.dist(&ap).max(CLAMP_DISTANCE).powf(-params.alpha))
                    .sum()
            } else {
                0.0
            };
            Ok(u64::from(signal >= params.beta * (interference + params.sigma2)))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(wins as f64 / cfg.frames as f64)
}

/// Largest distance between the empirical CCDF of `harvest_series` and the
/// analytic CCDF of Z_F.
pub fn harvest_ccdf_gap(cfg: &SimConfig, params: &NetworkParams, n_dl: u32) -> Result<f64> {
    let dist = EnergyDistribution::new(params, n_dl)?;
    let mut z = harvest_series(cfg, params, n_dl)?;
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    z.iter().enumerate().try_fold(0.0_f64, |gap, (i, &zi)| {
        let analytic = dist.ccdf_zf(zi)?;
        // the empirical CCDF jumps from (n-i)/n to (n-i-1)/n at zi
        let above = (n - i as f64) / n;
        let below = (n - i as f64 - 1.0) / n;
        Ok(gap.max((above - analytic).abs()).max((below - analytic).abs()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig4_params() -> NetworkParams {
        NetworkParams { lambda_ap: 0.0005, lambda_w: 0.005, t_slots: 3, ..NetworkParams::reference() }
    }

    #[test]
    fn fast_oracle_ccdf_gap_is_small() {
        let p = NetworkParams::reference();
        let cfg = SimConfig::new(100.0, 20_000, 5).unwrap().with_harvest(HarvestModel::FastOracle);
        let gap = harvest_ccdf_gap(&cfg, &p, 60).unwrap();
        // DKW: P(sup > 0.015) ≤ 2·exp(-2·20000·0.015²) ≈ 2.5e-4
        assert!(gap < 0.015, "gap {gap}");
    }

    #[test]
    fn ppp_count_mean() {
        let mut rng = frame_rng(7, 0);
        let n = 1000;
        let total: usize = (0..n).map(|_| gen_ppp(&mut rng, 0.0008, 1000.0).unwrap().len()).sum();
        let mean = total as f64 / n as f64;
        // sd of the mean is √800/√1000 ≈ 0.894
        assert!((mean - 800.0).abs() < 3.0 * (800.0f64 / 1000.0).sqrt(), "mean {mean}");
    }

    #[test]
    fn ppp_empty_window() {
        let mut rng = frame_rng(1, 0);
        assert!(gen_ppp(&mut rng, 0.5, 0.0).unwrap().is_empty());
        assert!(gen_ppp(&mut rng, 0.0, 10.0).is_err());
    }

    #[test]
    fn ppp_points_inside_window() {
        let mut rng = frame_rng(3, 9);
        let s = gen_ppp(&mut rng, 0.01, 50.0).unwrap();
        assert!(s.points.iter().all(|p| (0.0..=50.0).contains(&p.x) && (0.0..=50.0).contains(&p.y)));
    }

    #[test]
    fn displace_keeps_cardinality_and_decorrelates() {
        let mut rng = frame_rng(11, 0);
        let side = 100.0;
        let a = gen_ppp(&mut rng, 0.5, side).unwrap();
        let b = displace(&a, &mut rng);
        assert_eq!(a.len(), b.len());
        let mean: f64 = a.points.iter().zip(&b.points).map(|(p, q)| p.dist(q)).sum::<f64>() / a.len() as f64;
        // mean distance between two uniform points in a unit square
        let oracle = (2.0 + 2f64.sqrt() + 5.0 * (1.0 + 2f64.sqrt()).ln()) / 15.0;
        assert!((oracle - 0.5214).abs() < 1e-4);
        assert!((mean / side - oracle).abs() < 0.01, "mean {}", mean / side);
    }

    #[test]
    fn harvest_without_aps_is_zero() {
        let mut rng = frame_rng(0, 0);
        let empty = PointSet { side: 10.0, points: vec![] };
        let p = NetworkParams::reference();
        assert_eq!(harvest_frame(&mut rng, Point { x: 5.0, y: 5.0 }, &empty, 3, &p), 0.0);
    }

    #[test]
    fn single_ap_at_unit_distance_is_exponential() {
        let p = NetworkParams { eta: 1.0, p_d: 1.0, ..NetworkParams::reference() };
        let aps = PointSet { side: 10.0, points: vec![Point { x: 6.0, y: 5.0 }] };
        let node = Point { x: 5.0, y: 5.0 };
        let mut rng = frame_rng(5, 0);
        let n = 100_000;
        let sum: f64 = (0..n).map(|_| harvest_frame(&mut rng, node, &aps, 1, &p)).sum();
        assert!((sum / n as f64 - 1.0).abs() < 0.015);
    }

    #[test]
    fn clamp_guards_the_singularity() {
        let p = NetworkParams { eta: 1.0, p_d: 1.0, ..NetworkParams::reference() };
        let node = Point { x: 5.0, y: 5.0 };
        let aps = PointSet { side: 10.0, points: vec![node] };
        let z = harvest_frame(&mut frame_rng(2, 0), node, &aps, 1, &p);
        assert!(z.is_finite() && z > 0.0);
        assert!((clamp_bias_bound(0.0008) - 0.0008 * std::f64::consts::PI * 0.01).abs() < 1e-18);
    }

    #[test]
    fn frame_streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| frame_rng(42, 3).random()).collect();
        let b: u64 = frame_rng(42, 3).random();
        let c: u64 = frame_rng(42, 4).random();
        assert_eq!(a[0], b);
        assert_ne!(b, c);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(100.0, 10, 0).is_ok());
        assert!(SimConfig::new(1000.0, 10, 0).is_err());
        assert!(SimConfig::new(0.0, 10, 0).is_err());
        assert!(SimConfig::new(10.0, 0, 0).is_err());
    }

    #[test]
    fn free_fast_oracle_matches_rho_free() {
        let p = NetworkParams::reference();
        let cfg = SimConfig::new(100.0, 100_000, 17).unwrap().with_harvest(HarvestModel::FastOracle);
        let emp = run_battery_frames(&cfg, &p, 60, 0.02).unwrap();
        let exact = EnergyDistribution::new(&p, 60).unwrap().rho_free(0.02, &ErfClipConfig::default()).unwrap();
        assert!((emp - exact).abs() < 0.01, "{emp} vs {exact}");
    }

    #[test]
    fn infinite_battery_almost_always_transmits() {
        let p = NetworkParams::reference();
        let cfg = SimConfig::new(100.0, 100_000, 3)
            .unwrap()
            .with_harvest(HarvestModel::FastOracle)
            .with_mode(BatteryMode::Infinite);
        assert!(run_battery_frames(&cfg, &p, 60, 0.02).unwrap() >= 0.995);
    }

    #[test]
    fn huge_cap_behaves_like_infinite() {
        let p = NetworkParams::reference();
        let cfg = SimConfig::new(100.0, 100_000, 4)
            .unwrap()
            .with_harvest(HarvestModel::FastOracle)
            .with_mode(BatteryMode::Finite { capacity: 20.0 });
        assert!(run_battery_frames(&cfg, &p, 60, 0.02).unwrap() >= 0.995);
    }

    #[test]
    fn runs_are_bit_reproducible() {
        let p = fig4_params();
        let cfg = SimConfig::new(20.0, 200, 99).unwrap();
        let a = independence_gap(&cfg, &p, 2, 1e-6).unwrap();
        let b = independence_gap(&cfg, &p, 2, 1e-6).unwrap();
        assert_eq!(a, b);
        let z1 = harvest_series(&cfg, &p, 2).unwrap();
        let z2 = harvest_series(&cfg, &p, 2).unwrap();
        assert_eq!(z1, z2);
    }

    #[test]
    fn void_at_zero_side_is_one() {
        let p = fig4_params();
        let cfg = SimConfig::new(20.0, 200, 1).unwrap();
        let v = void_probability(&cfg, &p, 2, 1e-5, &[0.0, 20.0]).unwrap();
        assert_eq!(v[0].empirical, 1.0);
        assert_eq!(v[0].analytic, 1.0);
        assert!(v[1].analytic < 1.0);
    }

    #[test]
    fn noise_limited_link_fails() {
        let p = NetworkParams { sigma2: 1e3, ..fig4_params() };
        let cfg = SimConfig::new(20.0, 500, 8).unwrap();
        assert_eq!(empirical_psuc(&cfg, &p, 0.3, 2, 1e-9).unwrap(), 0.0);
    }
}
