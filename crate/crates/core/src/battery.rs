//! Finite-battery transmission probability: the quantized battery chain,
//! its refining lower bound, and the closed-form bounds around it.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::energy::EnergyDistribution;
use crate::error::{domain, Result, WpcnError};
use crate::numerics::{gamma_ratio, ErfClipConfig};
use crate::params::NetworkParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BatteryMode {
    Free,
    Finite { capacity: f64 },
    Infinite,
}

impl BatteryMode {
    /// A finite battery must hold at least one transmission.
    pub fn finite(capacity: f64, p_u: f64) -> Result<Self> {
        if !(capacity >= p_u && p_u > 0.0) {
            return Err(domain(format!("capacity {capacity} must be at least P_U = {p_u}")));
        }
        Ok(Self::Finite { capacity })
    }
}

/// Anything that can push a distribution one step forward.
pub trait TransitionKernel {
    fn n_states(&self) -> usize;

    /// `out = pi · P`.
    fn left_mul(&self, pi: &[f64], out: &mut [f64]);

    fn as_dense(&self) -> Option<&DenseTransition> {
        None
    }
}

/// Row-major square stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTransition {
    n: usize,
    data: Vec<f64>,
}

impl DenseTransition {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(domain("transition matrix is empty"));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(domain(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if row.iter().any(|&p| !(p >= 0.0)) {
                return Err(domain(format!("row {i} has a negative or NaN entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(domain(format!("row {i} sums to {s}")));
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

impl TransitionKernel for DenseTransition {
    fn n_states(&self) -> usize {
        self.n
    }

    fn left_mul(&self, pi: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &p) in pi.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (o, &t) in out.iter_mut().zip(self.row(i)) {
                *o += p * t;
            }
        }
    }

    fn as_dense(&self) -> Option<&DenseTransition> {
        Some(self)
    }
}

struct Convolver {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<Complex<f64>>,
}

// Below this many states a direct O(V²) convolution is cheaper than FFTs.
const FFT_MIN_STATES: usize = 256;

/// Quantized battery chain with step δ, transmit index U = ⌈P_U/δ⌉ and top
/// index V = ⌊C/δ⌋.
///
/// From level i the node spends U when i ≥ U and keeps w = i - U·[i≥U]; the
/// next level is min(w + ⌊Z/δ⌋, V). Only the tail T_k = P(Z ≥ kδ) is stored;
/// the matrix is never formed unless asked for.
pub struct BatteryChain {
    pub delta: f64,
    pub u_idx: usize,
    pub v_idx: usize,
    tail: Vec<f64>,
    incr: Vec<f64>,
    conv: Option<Convolver>,
}

impl fmt::Debug for BatteryChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BatteryChain")
            .field("delta", &self.delta)
            .field("u_idx", &self.u_idx)
            .field("v_idx", &self.v_idx)
            .field("fft", &self.conv.as_ref().map(|c| c.len))
            .finish()
    }
}

fn near_integer(r: f64) -> Option<f64> {
    let k = r.round();
    ((r - k).abs() <= 1e-9 * r.abs().max(1.0)).then_some(k)
}

/// (U, V) for a given step, treating ratios within rounding of an integer
/// as that integer.
pub fn quantize(p_u: f64, capacity: f64, delta: f64) -> Result<(usize, usize)> {
    if !(delta > 0.0 && p_u > 0.0 && capacity > 0.0) {
        return Err(domain("step, power and capacity must be positive"));
    }
    let ru = p_u / delta;
    let rv = capacity / delta;
    let u = near_integer(ru).unwrap_or_else(|| ru.ceil()).max(1.0);
    let v = near_integer(rv).unwrap_or_else(|| rv.floor());
    if !(u.is_finite() && v.is_finite()) || v > 1e12 {
        return Err(domain("quantization produced a non-representable state count"));
    }
    let (u, v) = (u as usize, v as usize);
    if u > v {
        return Err(WpcnError::Quantization { u, v });
    }
    Ok((u, v))
}

/// Builds the chain from the tail P(Z ≥ z) of the per-frame harvest.
/// Negative arguments are read as 0, so an impossible discharge gets no mass.
pub fn build_chain<F: Fn(f64) -> f64>(ccdf: F, p_u: f64, capacity: f64, delta: f64) -> Result<BatteryChain> {
    let (u_idx, v_idx) = quantize(p_u, capacity, delta)?;
    let tail: Vec<f64> = (0..=v_idx).map(|k| ccdf((k as f64 * delta).max(0.0))).collect();
    if (tail[0] - 1.0).abs() > 1e-12 {
        return Err(domain(format!("ccdf(0) must be 1, got {}", tail[0])));
    }
    if tail.windows(2).any(|w| w[1] > w[0] + 1e-15) || tail.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(domain("ccdf must be nonincreasing with values in [0,1]"));
    }
    let incr: Vec<f64> = tail.windows(2).map(|w| (w[0] - w[1]).max(0.0)).collect();

    let conv = (v_idx >= FFT_MIN_STATES).then(|| {
        let len = (2 * v_idx).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut kernel_hat = vec![Complex::new(0.0, 0.0); len];
        for (k, &q) in incr.iter().enumerate() {
            kernel_hat[k].re = q;
        }
        forward.process(&mut kernel_hat);
        Convolver { len, forward, inverse, kernel_hat }
    });

    Ok(BatteryChain { delta, u_idx, v_idx, tail, incr, conv })
}

impl BatteryChain {
    fn post_transmit(&self, i: usize) -> usize {
        if i >= self.u_idx {
            i - self.u_idx
        } else {
            i
        }
    }

    /// P(Z ∈ [kδ, (k+1)δ)).
    pub fn increment_pmf(&self) -> &[f64] {
        &self.incr
    }

    /// Row i of the transition matrix.
    pub fn row(&self, i: usize) -> Vec<f64> {
        let v = self.v_idx;
        let w = self.post_transmit(i);
        let mut row = vec![0.0; v + 1];
        for (j, r) in row.iter_mut().enumerate().take(v).skip(w) {
            *r = self.incr[j - w];
        }
        row[v] = self.tail[v - w];
        row
    }

    pub fn to_dense(&self) -> Result<DenseTransition> {
        DenseTransition::new((0..=self.v_idx).map(|i| self.row(i)).collect())
    }

    /// Mass σ_w on post-transmission level w.
    fn post_transmit_mass(&self, pi: &[f64]) -> Vec<f64> {
        let (u, v) = (self.u_idx, self.v_idx);
        let mut sigma = vec![0.0; v + 1];
        for (i, &p) in pi.iter().enumerate() {
            sigma[if i >= u { i - u } else { i }] += p;
        }
        sigma.truncate(v.saturating_sub(u).max(u.saturating_sub(1)) + 1);
        sigma
    }

    /// ρ^LB = P(level ≥ U) under `pi`.
    pub fn transmit_mass(&self, pi: &[f64]) -> f64 {
        pi[self.u_idx..=self.v_idx].iter().sum()
    }
}

impl TransitionKernel for BatteryChain {
    fn n_states(&self) -> usize {
        self.v_idx + 1
    }

    fn left_mul(&self, pi: &[f64], out: &mut [f64]) {
        let v = self.v_idx;
        let sigma = self.post_transmit_mass(pi);
        match &self.conv {
            Some(c) => {
                let mut buf = vec![Complex::new(0.0, 0.0); c.len];
                for (b, &s) in buf.iter_mut().zip(&sigma) {
                    b.re = s;
                }
                c.forward.process(&mut buf);
                for (b, k) in buf.iter_mut().zip(&c.kernel_hat) {
                    *b *= *k;
                }
                c.inverse.process(&mut buf);
                let scale = 1.0 / c.len as f64;
                for (o, b) in out[..v].iter_mut().zip(&buf) {
                    *o = b.re * scale;
                }
            }
            None => {
                for (j, o) in out[..v].iter_mut().enumerate() {
                    *o = sigma.iter().take(j + 1).enumerate().map(|(w, &s)| s * self.incr[j - w]).sum();
                }
            }
        }
        out[v] = sigma.iter().enumerate().map(|(w, &s)| s * self.tail[v - w]).sum();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateConfig {
    /// Target on ‖πP − π‖₁.
    pub tol: f64,
    pub max_iter: usize,
    /// Dense kernels up to this size are solved directly.
    pub direct_limit: usize,
}

impl Default for SteadyStateConfig {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 200_000, direct_limit: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub pi: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// `Some(false)` when the chain has several stationary laws and the
    /// returned one depends on the start; `None` when not checked.
    pub unique: Option<bool>,
}

fn residual_l1<K: TransitionKernel + ?Sized>(kernel: &K, pi: &[f64]) -> f64 {
    let mut next = vec![0.0; pi.len()];
    kernel.left_mul(pi, &mut next);
    next.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum()
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// Solves (Pᵀ - I)π = 0 with Σπ = 1 by partial-pivot LU; `None` if singular.
fn direct_solve(p: &DenseTransition) -> Option<Vec<f64>> {
    let n = p.n;
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[j * n + i] = p.get(i, j) - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[(n - 1) * n..].iter_mut().for_each(|x| *x = 1.0);
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;

    for col in 0..n {
        let piv = (col..n).max_by(|&r, &s| a[r * n + col].abs().total_cmp(&a[s * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-12 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    normalize(&mut x);
    Some(x)
}

fn power_iterate<K: TransitionKernel + ?Sized>(
    kernel: &K,
    mut pi: Vec<f64>,
    cfg: &SteadyStateConfig,
) -> Result<(Vec<f64>, usize)> {
    let mut next = vec![0.0; pi.len()];
    for it in 1..=cfg.max_iter {
        kernel.left_mul(&pi, &mut next);
        // FFT round-off can leave tiny negative entries
        next.iter_mut().for_each(|x| *x = x.max(0.0));
        normalize(&mut next);
        let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if diff < cfg.tol {
            return Ok((pi, it));
        }
    }
    Err(WpcnError::NonConvergence { what: "power iteration", iterations: cfg.max_iter })
}

/// Restarted GMRES on (I - Pᵀ)π = 0 with the last equation replaced by
/// Σπ = 1, using only left products. Returns the clamped, normalized
/// iterate and the number of products spent.
fn gmres_stationary<K: TransitionKernel + ?Sized>(
    kernel: &K,
    start: &[f64],
    restart: usize,
    max_restarts: usize,
) -> (Vec<f64>, usize) {
    let n = start.len();
    let mut tmp = vec![0.0; n];
    let mut apply = |x: &[f64], out: &mut [f64]| {
        kernel.left_mul(x, &mut tmp);
        for i in 0..n {
            out[i] = x[i] - tmp[i];
        }
        out[n - 1] = x.iter().sum();
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let m = restart.min(n).max(1);
    let mut x = start.to_vec();
    let mut products = 0;
    let mut r = vec![0.0; n];
    for _ in 0..max_restarts {
        apply(&x, &mut r);
        products += 1;
        r.iter_mut().for_each(|v| *v = -*v);
        r[n - 1] += 1.0;
        let beta = dot(&r, &r).sqrt();
        if beta < 1e-15 {
            break;
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let mut w = vec![0.0; n];
            apply(&basis[k], &mut w);
            products += 1;
            for (j, v) in basis.iter().enumerate() {
                let hj = dot(&w, v);
                h[j][k] = hj;
                w.iter_mut().zip(v).for_each(|(a, b)| *a -= hj * b);
            }
            let hn = dot(&w, &w).sqrt();
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            if hn < 1e-300 || g[k + 1].abs() < 1e-15 * beta.max(1.0) {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, v) in y.iter().zip(&basis) {
            x.iter_mut().zip(v).for_each(|(a, b)| *a += yi * b);
        }
        if g[k_used].abs() < 1e-15 {
            break;
        }
    }
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    normalize(&mut x);
    (x, products)
}

/// Stationary law of `kernel`. Dense kernels within `direct_limit` go
/// through a direct solve; otherwise power iteration starts from `init`
/// (uniform if absent).
pub fn steady_state<K: TransitionKernel + ?Sized>(
    kernel: &K,
    init: Option<&[f64]>,
    cfg: &SteadyStateConfig,
) -> Result<SteadyState> {
    let n = kernel.n_states();
    let start = match init {
        Some(v) if v.len() == n => {
            let mut v = v.to_vec();
            normalize(&mut v);
            v
        }
        Some(v) => return Err(domain(format!("initial vector has {} entries, chain has {n}", v.len()))),
        None => vec![1.0 / n as f64; n],
    };

    if let Some(dense) = kernel.as_dense().filter(|_| n <= cfg.direct_limit) {
        if let Some(pi) = direct_solve(dense) {
            let residual = residual_l1(kernel, &pi);
            if residual < cfg.tol.max(1e-10) {
                return Ok(SteadyState { pi, residual, iterations: 0, unique: Some(true) });
            }
            let (pi, iterations) = power_iterate(kernel, pi, cfg)?;
            let residual = residual_l1(kernel, &pi);
            return Ok(SteadyState { pi, residual, iterations, unique: Some(true) });
        }
        let (pi, iterations) = power_iterate(kernel, start, cfg)?;
        let residual = residual_l1(kernel, &pi);
        return Ok(SteadyState { pi, residual, iterations, unique: Some(false) });
    }

    let (pi, products) = gmres_stationary(kernel, &start, 120, 20);
    let (pi, iterations) = power_iterate(kernel, pi, cfg)?;
    let residual = residual_l1(kernel, &pi);
    Ok(SteadyState { pi, residual, iterations: products + iterations, unique: None })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovBoundConfig {
    pub delta0: f64,
    pub theta: f64,
    /// Largest V + 1 allowed before giving up with a resource error.
    pub state_cap: usize,
    pub max_refinements: usize,
    pub steady: SteadyStateConfig,
}

impl Default for MarkovBoundConfig {
    fn default() -> Self {
        Self {
            delta0: 1e-4,
            theta: 1e-3,
            state_cap: 200_001,
            max_refinements: 30,
            steady: SteadyStateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovBound {
    pub rho: f64,
    /// Step of the last chain solved.
    pub delta: f64,
    pub states: usize,
    pub solves: usize,
    pub residual: f64,
}

/// Splits each state of a coarse solution into its two children on the
/// halved grid, as a warm start.
fn refine(pi: &[f64], n_new: usize) -> Vec<f64> {
    let last = pi.len() - 1;
    let mut out: Vec<f64> = (0..n_new).map(|j| pi[(j / 2).min(last)]).collect();
    normalize(&mut out);
    out
}

/// Halves δ until successive ρ^LB values agree to within θ.
pub fn rho_lb_markov_with<F: Fn(f64) -> f64>(
    ccdf: F,
    p_u: f64,
    capacity: f64,
    cfg: &MarkovBoundConfig,
) -> Result<MarkovBound> {
    if !(p_u > 0.0 && capacity >= p_u) {
        return Err(domain(format!("capacity {capacity} must be at least P_U = {p_u} > 0")));
    }
    if !(cfg.delta0 > 0.0 && cfg.theta > 0.0) {
        return Err(domain("delta0 and theta must be positive"));
    }
    let mut rho0 = 1.0;
    let mut rho_lb: f64 = 0.0;
    let mut delta = cfg.delta0;
    let mut prev: Option<Vec<f64>> = None;
    let mut solves = 0;
    let mut residual = 0.0;
    let mut states = 0;
    while (rho0 - rho_lb).abs() > cfg.theta {
        if solves >= cfg.max_refinements {
            return Err(WpcnError::NonConvergence { what: "Markov lower bound refinement", iterations: solves });
        }
        rho0 = rho_lb;
        delta /= 2.0;
        let (_, v) = quantize(p_u, capacity, delta)?;
        if v + 1 > cfg.state_cap {
            return Err(WpcnError::Resource { states: v + 1, cap: cfg.state_cap });
        }
        let chain = build_chain(&ccdf, p_u, capacity, delta)?;
        let init = prev.as_deref().map(|p| refine(p, v + 1));
        let ss = steady_state(&chain, init.as_deref(), &cfg.steady)?;
        rho_lb = chain.transmit_mass(&ss.pi).clamp(0.0, 1.0);
        residual = ss.residual;
        states = v + 1;
        prev = Some(ss.pi);
        solves += 1;
    }
    Ok(MarkovBound { rho: rho_lb, delta, states, solves, residual })
}

/// Markov lower bound on ρ for the harvest law of the network.
pub fn rho_lb_markov(
    params: &NetworkParams,
    n_dl: u32,
    p_u: f64,
    capacity: f64,
    cfg: &MarkovBoundConfig,
) -> Result<MarkovBound> {
    let dist = EnergyDistribution::new(params, n_dl)?;
    dist.ccdf_zf(0.0)?;
    rho_lb_markov_with(|z| dist.ccdf_unchecked(z), p_u, capacity, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedBounds {
    pub lower: f64,
    pub upper: f64,
    pub erf_branch: f64,
    pub chernoff_branch: f64,
}

/// max(ρ_free, 1 - exp(-Q(C - P_U))) ≤ ρ ≤ 1.
pub fn rho_bounds_closed(
    params: &NetworkParams,
    n_dl: u32,
    p_u: f64,
    capacity: f64,
    clip: &ErfClipConfig,
) -> Result<ClosedBounds> {
    if !(capacity >= p_u) {
        return Err(domain(format!("capacity {capacity} must be at least P_U = {p_u}")));
    }
    let dist = EnergyDistribution::new(params, n_dl)?;
    let erf_branch = dist.rho_free(p_u, clip)?;
    let q = dist.chernoff_exponent(p_u)?;
    let chernoff_branch = -(-q * (capacity - p_u)).exp_m1();
    Ok(ClosedBounds { lower: erf_branch.max(chernoff_branch), upper: 1.0, erf_branch, chernoff_branch })
}

/// Smallest λ_AP for which the battery-free erf saturates, so ρ = 1 for any
/// battery.
pub fn rho_one_density_threshold(params: &NetworkParams, n_dl: u32, p_u: f64, clip: &ErfClipConfig) -> Result<f64> {
    if params.alpha != 4.0 {
        return Err(WpcnError::UnsupportedAlpha(params.alpha));
    }
    let gr = gamma_ratio(n_dl, params.alpha)?;
    Ok(2.0 * clip.v_e / gr * (p_u / (std::f64::consts::PI.powi(3) * params.p_d * params.eta)).sqrt())
}

pub fn rho_one_threshold(params: &NetworkParams, n_dl: u32, p_u: f64, clip: &ErfClipConfig) -> Result<bool> {
    Ok(params.lambda_ap >= rho_one_density_threshold(params, n_dl, p_u, clip)?)
}

/// ρ with an unbounded battery.
pub fn rho_infinite() -> f64 {
    1.0
}

/// ρ under the model of `mode`; a battery smaller than P_U never transmits.
pub fn rho_for_mode(
    params: &NetworkParams,
    n_dl: u32,
    p_u: f64,
    mode: BatteryMode,
    clip: &ErfClipConfig,
    markov: &MarkovBoundConfig,
) -> Result<f64> {
    match mode {
        BatteryMode::Free => EnergyDistribution::new(params, n_dl)?.rho_free(p_u, clip),
        BatteryMode::Infinite => Ok(rho_infinite()),
        BatteryMode::Finite { capacity } if capacity < p_u => Ok(0.0),
        BatteryMode::Finite { capacity } => Ok(rho_lb_markov(params, n_dl, p_u, capacity, markov)?.rho),
    }
}
