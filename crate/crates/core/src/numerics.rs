//! Special functions, semi-infinite quadrature and bracketed root finding.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf as sf;

use crate::error::{domain, Result, WpcnError};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, rel_tol: f64, max_iter: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0 && max_iter >= 1) {
            return Err(domain("tolerances must be positive and max_iter at least 1"));
        }
        Ok(Self { abs_tol, rel_tol, max_iter })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_iter: 200 }
    }
}

/// Saturation rule for erf: values at or beyond `v_e` count as exactly 1,
/// where `1 - erf(v_e) = 10^-n_digits`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErfClipConfig {
    pub n_digits: u32,
    pub v_e: f64,
}

impl ErfClipConfig {
    pub fn new(n_digits: u32) -> Result<Self> {
        if n_digits == 0 || n_digits > 300 {
            return Err(domain(format!("n_digits must be in 1..=300, got {n_digits}")));
        }
        let v_e = erfcinv(10f64.powi(-(n_digits as i32)))?;
        Ok(Self { n_digits, v_e })
    }
}

impl Default for ErfClipConfig {
    fn default() -> Self {
        Self::new(9).expect("n = 9 is in range")
    }
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Inverse error function on (-1, 1).
pub fn erfinv(y: f64) -> Result<f64> {
    if !(y.abs() < 1.0) {
        return Err(domain(format!("erfinv needs |y| < 1, got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y.abs() > 0.5 {
        // near the ends work on erfc so 1 - |y| keeps its digits
        let x = erfcinv(1.0 - y.abs())?;
        return Ok(x.copysign(y));
    }
    let mut x = sf::erf_inv(y);
    for _ in 0..3 {
        let step = (erf(x) - y) / (FRAC_2_SQRT_PI * (-x * x).exp());
        x -= step;
        if step.abs() <= 1e-16 * x.abs() {
            break;
        }
    }
    Ok(x)
}

/// Inverse complementary error function on (0, 2).
pub fn erfcinv(y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 2.0) {
        return Err(domain(format!("erfcinv needs 0 < y < 2, got {y}")));
    }
    let mut x = sf::erfc_inv(y);
    for _ in 0..3 {
        let step = (erfc(x) - y) / (-FRAC_2_SQRT_PI * (-x * x).exp());
        if !step.is_finite() {
            break;
        }
        x -= step;
        if step.abs() <= 1e-16 * x.abs() {
            break;
        }
    }
    Ok(x)
}

/// Standard Gaussian tail probability.
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Scaled tail `exp(x²/2)·Q(x)`, finite for all x where the product is.
pub fn qe(x: f64) -> f64 {
    if x < 4.0 {
        return (0.5 * x * x).exp() * gaussian_q(x);
    }
    // Q(x) = φ(x) / (x + 1/(x + 2/(x + 3/(x + ...)))), modified Lentz
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / ((2.0 * PI).sqrt() * f)
}

/// Γ(N + 2/α) / Γ(N), computed through log-gamma.
pub fn gamma_ratio(n: u32, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(domain(format!("alpha must exceed 2, got {alpha}")));
    }
    if n == 0 {
        return Err(domain("N must be at least 1"));
    }
    let n = f64::from(n);
    Ok((libm::lgamma(n + 2.0 / alpha) - libm::lgamma(n)).exp())
}

pub fn gamma_fn(x: f64) -> f64 {
    libm::tgamma(x)
}

/// erf(x) below the saturation point, exactly 1 at or above it.
pub fn clipped_erf(x: f64, cfg: &ErfClipConfig) -> f64 {
    if x >= cfg.v_e {
        1.0
    } else {
        erf(x)
    }
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment { a, b, value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

/// Integral of `f` over [0, ∞) for integrands with an exponentially decaying
/// tail. The range is cut where `f` falls below 1e-14 of its observed peak,
/// then integrated by globally adaptive Gauss-Kronrod. `tol.max_iter` bounds
/// the number of bisections.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, tol: &Tolerance) -> Result<f64> {
    let mut x = 1e-3;
    let mut peak = f(0.0).abs().max(f(x).abs());
    let mut breaks = vec![0.0, x];
    let mut doublings = 0;
    loop {
        let fx = f(x).abs();
        peak = peak.max(fx);
        if fx < 1e-14 * peak || (peak == 0.0 && doublings > 60) {
            break;
        }
        x *= 2.0;
        breaks.push(x);
        doublings += 1;
        if doublings > 1100 || !x.is_finite() {
            return Err(WpcnError::NonConvergence { what: "quadrature cut-off search", iterations: doublings });
        }
    }

    let mut segments: Vec<Segment> = breaks.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
    for _ in 0..tol.max_iter.max(1) * 10 {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        if err <= tol.abs_tol.max(tol.rel_tol * total.abs()) {
            return Ok(total);
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segments.push(gk15(&f, s.a, mid));
        segments.push(gk15(&f, mid, s.b));
    }
    Err(WpcnError::NonConvergence { what: "adaptive quadrature", iterations: tol.max_iter * 10 })
}

/// Brent's bracketing root finder. Iteration stops once the bracket is
/// narrower than `abs_tol` (plus a few ulps) or an exact zero is hit; the
/// method falls back to bisection whenever interpolation stalls.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: &Tolerance) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa * fb < 0.0) {
        return Err(WpcnError::Bracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.abs_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = f(b);
    }
    Err(WpcnError::NonConvergence { what: "root finder", iterations: tol.max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Taylor series of erf, summed with enough terms for |x| <= 3.
    fn erf_taylor(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        sum * FRAC_2_SQRT_PI
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn erf_examples() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(1.0) - erf_taylor(1.0)).abs() < 1e-14);
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erf(10.0) - 1.0).abs() < 1e-12);
        for &x in &[0.1, 0.5, 1.7, 2.5, 3.0] {
            assert!((erf(x) - erf_taylor(x)).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn erf_odd_increasing_bounded() {
        let xs: Vec<f64> = (0..1000).map(|i| -5.0 + 10.0 * i as f64 / 999.0).collect();
        for w in xs.windows(2) {
            assert!(erf(w[1]) >= erf(w[0]));
        }
        for &x in &xs {
            assert_eq!(erf(-x), -erf(x));
            assert!(erf(x).abs() <= 1.0);
        }
    }

    #[test]
    fn erfinv_examples() {
        assert_eq!(erfinv(0.0).unwrap(), 0.0);
        assert!((erfinv(erf_taylor(1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!(erfinv(1.0).is_err());
        assert!(erfinv(-1.0).is_err());
        assert!(erfinv(f64::NAN).is_err());
        for i in 0..100 {
            let y = -0.999 + 1.998 * (i as f64 + 0.5) / 100.0;
            assert!((erf(erfinv(y).unwrap()) - y).abs() < 1e-10);
        }
    }

    #[test]
    fn erfinv_inverts_erf_on_grid() {
        for i in 0..1000 {
            let x = -2.3 + 4.6 * i as f64 / 999.0;
            let y = erf(x);
            if y.abs() < 0.999 {
                assert!((erfinv(y).unwrap() - x).abs() < 1e-10, "x = {x}");
            }
        }
    }

    #[test]
    fn v_e_for_nine_digits() {
        let cfg = ErfClipConfig::default();
        assert!((erfc(cfg.v_e) - 1e-9).abs() < 1e-20);
        assert!((cfg.v_e - 4.320005).abs() < 1e-5);
        assert!(erf(cfg.v_e) >= 1.0 - 1e-9 - 1e-15);
    }

    #[test]
    fn clipped_erf_branches() {
        let cfg = ErfClipConfig::default();
        assert_eq!(clipped_erf(0.0, &cfg), 0.0);
        assert_eq!(clipped_erf(cfg.v_e, &cfg), 1.0);
        assert!(clipped_erf(cfg.v_e / 2.0, &cfg) < 1.0);
        assert_eq!(clipped_erf(cfg.v_e / 2.0, &cfg), erf(cfg.v_e / 2.0));
    }

    #[test]
    fn gaussian_q_examples() {
        assert_eq!(gaussian_q(0.0), 0.5);
        let oracle = 0.5 * (1.0 - erf_taylor(1.0 / SQRT_2));
        assert!((gaussian_q(1.0) - oracle).abs() < 1e-14);
        assert!((gaussian_q(1.0) - 0.158_655_253_931_457_05).abs() < 1e-15);
        // asymptotic series φ(x)/x · (1 - 1/x² + 3/x⁴ - 15/x⁶)
        let x: f64 = 8.0;
        let phi = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let series = phi / x * (1.0 - 1.0 / x.powi(2) + 3.0 / x.powi(4) - 15.0 / x.powi(6));
        assert!(((gaussian_q(x) - series) / series).abs() < 1e-3);
    }

    #[test]
    fn gaussian_q_symmetry_and_bound() {
        for i in 0..400 {
            let x = -6.0 + 12.0 * i as f64 / 399.0;
            assert!((gaussian_q(x) + gaussian_q(-x) - 1.0).abs() < 1e-12);
            if x > 0.0 {
                let bound = (-0.5 * x * x).exp() / ((2.0 * PI).sqrt() * x);
                assert!(gaussian_q(x) <= bound);
            }
            let next = x + 12.0 / 399.0;
            assert!(gaussian_q(next) < gaussian_q(x));
        }
    }

    #[test]
    fn qe_matches_direct_form_and_survives_large_arguments() {
        for &x in &[-3.0f64, 0.0, 1.0, 3.9, 4.0, 4.5, 6.0, 10.0, 20.0] {
            let direct = (0.5 * x * x).exp() * gaussian_q(x);
            assert!(((qe(x) - direct) / direct).abs() < 1e-12, "x = {x}");
        }
        // x/(x²+1) < sqrt(2π)·qe(x) < 1/x
        for &x in &[50.0, 1e3, 1e6] {
            let v = qe(x) * (2.0 * PI).sqrt();
            assert!(v.is_finite() && v < 1.0 / x && v > x / (x * x + 1.0));
        }
    }

    #[test]
    fn gamma_ratio_examples() {
        let sqrt_pi = PI.sqrt();
        assert!((gamma_ratio(1, 4.0).unwrap() - sqrt_pi / 2.0).abs() < 1e-14);
        assert!((gamma_ratio(2, 4.0).unwrap() - 3.0 * sqrt_pi / 4.0).abs() < 1e-14);
        let r60 = gamma_ratio(60, 4.0).unwrap();
        assert!((r60 - 7.7298).abs() < 1e-4);
        assert!((r60 - (59.75f64).sqrt()).abs() < 1e-3);
        assert!(gamma_ratio(1, 2.0).is_err());
        assert!(gamma_ratio(10_000, 4.0).unwrap().is_finite());
    }

    #[test]
    fn gamma_ratio_recurrence() {
        for &alpha in &[2.5, 3.0, 4.0, 6.0] {
            for n in 1..200 {
                let lhs = gamma_ratio(n + 1, alpha).unwrap() / gamma_ratio(n, alpha).unwrap();
                let rhs = (f64::from(n) + 2.0 / alpha) / f64::from(n);
                assert!((lhs - rhs).abs() < 1e-12, "n = {n}, alpha = {alpha}");
            }
        }
    }

    #[test]
    fn quadrature_examples() {
        let tol = Tolerance::default();
        let one = integrate_semi_infinite(|x| (-x).exp(), &tol).unwrap();
        assert!((one - 1.0).abs() < 1e-10);

        let f = |x: f64| (-x - x * x).exp();
        let oracle = simpson(f, 0.0, 40.0, 400_000);
        let got = integrate_semi_infinite(f, &tol).unwrap();
        assert!((got - oracle).abs() < 1e-8);
        assert!((got - 0.5456).abs() < 1e-4);

        let lam = 0.0008;
        let pdf = integrate_semi_infinite(|x| PI * lam * (-PI * lam * x).exp(), &tol).unwrap();
        assert!((pdf - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quadrature_reports_non_convergence() {
        let tol = Tolerance::new(1e-300, 1e-300, 1).unwrap();
        let r = integrate_semi_infinite(|x| (-x).exp() * (1.0 + (50.0 * x).sin().abs()), &tol);
        assert!(matches!(r, Err(WpcnError::NonConvergence { .. })));
    }

    #[test]
    fn root_examples() {
        let tol = Tolerance::default();
        assert!((find_root(|x| x - 1.0, 0.0, 2.0, &tol).unwrap() - 1.0).abs() < 1e-12);
        let r = find_root(|x| erf(x) - 0.5, 0.0, 2.0, &tol).unwrap();
        assert!((r - erfinv(0.5).unwrap()).abs() < 1e-12);
        assert!((r - 0.476_936_276_204_469_9).abs() < 1e-12);
        assert!((erf(r) - 0.5).abs() < 1e-12);
        assert!(matches!(find_root(|x| x * x + 1.0, -1.0, 1.0, &tol), Err(WpcnError::Bracket { .. })));
    }

    #[test]
    fn root_finder_hits_iteration_cap() {
        let tol = Tolerance::new(1e-300, 1e-10, 3).unwrap();
        let r = find_root(|x| x.powi(3) - 0.3, 0.0, 5.0, &tol);
        assert!(matches!(r, Err(WpcnError::NonConvergence { .. })));
    }
}
