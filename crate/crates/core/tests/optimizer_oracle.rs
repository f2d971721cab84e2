use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpcn_core::optimize::{brute_force_oracle, optimize_free, PowerGrid};
use wpcn_core::{BatteryMode, NetworkParams, Problem, Regime};

/// Random feasible problems, `per_regime` of each density regime.
fn draws(per_regime: usize, seed: u64) -> Vec<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for target in [Regime::HighDensity, Regime::MediumDensity, Regime::LowDensity] {
        let mut got = 0;
        while got < per_regime {
            let t_slots = rng.random_range(5..=100u32);
            let lambda_w = 10f64.powf(rng.random_range(-3.5..-2.0));
            let base = NetworkParams { t_slots, lambda_w, ..NetworkParams::reference() };
            let k = Problem::new(base).map(|p| p.eq.k_epsilon).unwrap_or(0.015);
            let ratio = match target {
                Regime::HighDensity => rng.random_range(0.2..1.0),
                Regime::MediumDensity => rng.random_range(1.0..f64::from(t_slots - 1)),
                _ => rng.random_range(f64::from(t_slots - 1)..4.0 * f64::from(t_slots)),
            };
            let params = NetworkParams { lambda_ap: lambda_w / (k * ratio), ..base };
            if let Ok(pr) = Problem::new(params) {
                if pr.free_regime() == target {
                    out.push(pr);
                    got += 1;
                }
            }
        }
    }
    out
}

fn regime_case(pr: &Problem) -> (wpcn_core::OptimizationOutcome, wpcn_core::OptimizationOutcome) {
    let th = optimize_free(pr).unwrap();
    let bf = brute_force_oracle(pr, BatteryMode::Free, PowerGrid::geometric(200)).unwrap().outcome;
    (th, bf)
}

#[test]
fn high_and_low_regimes_match_brute_force() {
    for pr in draws(7, 2024).into_iter().filter(|p| p.free_regime() != Regime::MediumDensity) {
        let (th, bf) = regime_case(&pr);
        assert_eq!(th.feasible, bf.feasible);
        if !th.feasible {
            continue;
        }
        assert_eq!(th.best.unwrap().n_dl, bf.best.unwrap().n_dl, "{:?}", pr.params);
        assert!((th.throughput - bf.throughput).abs() <= 0.01 * bf.throughput, "{:?}", pr.params);
    }
}

#[test]
fn medium_regime_saturated_branch_matches_brute_force() {
    let mut seen = 0;
    for pr in draws(12, 77).into_iter().filter(|p| p.free_regime() == Regime::MediumDensity) {
        let (th, bf) = regime_case(&pr);
        if th.rho_at_best < 1.0 {
            continue;
        }
        seen += 1;
        assert_eq!(th.best.unwrap().n_dl, bf.best.unwrap().n_dl);
        assert_eq!(th.throughput, bf.throughput);
    }
    assert!(seen > 0);
}

// When the erf does not saturate at (N0, P_min) the printed rule returns that
// corner, but a larger N with a lower ρ can meet the density constraint and
// do better. The grid search must never do worse than the rule.
#[test]
fn medium_regime_corner_is_never_better_than_the_grid() {
    let mut beaten = 0;
    for pr in draws(12, 77).into_iter().filter(|p| p.free_regime() == Regime::MediumDensity) {
        let (th, bf) = regime_case(&pr);
        assert!(bf.throughput >= th.throughput * (1.0 - 1e-12));
        if bf.throughput > th.throughput * 1.01 {
            beaten += 1;
            assert!(th.rho_at_best < 1.0);
            assert!(bf.best.unwrap().n_dl > th.n0.unwrap());
        }
    }
    println!("corner rule beaten in {beaten} medium-density draws");
}

#[test]
fn low_regime_interior_optimum_is_tight() {
    for pr in draws(10, 5).into_iter().filter(|p| p.free_regime() == Regime::LowDensity) {
        let th = optimize_free(&pr).unwrap();
        let Some(best) = th.best else { continue };
        let p = &pr.params;
        if best.p_u > pr.eq.p_min && best.p_u < p.p_max {
            let lhs = p.lambda_w * th.rho_at_best;
            let rhs = pr.eq.k_epsilon * p.lambda_ap * p.ul_slots(best.n_dl);
            assert!((lhs - rhs).abs() <= 1e-9 * rhs, "{lhs} vs {rhs}");
        }
    }
}

fn density_sweep(lambda_w: f64) -> Vec<Problem> {
    (0..40)
        .filter_map(|i| {
            let lambda_ap = 1e-4 * 10f64.powf(i as f64 / 13.0);
            Problem::new(NetworkParams { lambda_ap, lambda_w, ..NetworkParams::reference() }).ok()
        })
        .collect()
}

#[test]
fn grid_optimum_nondecreasing_in_density() {
    for lambda_w in [0.0012, 0.002] {
        let mut prev = 0.0;
        for pr in density_sweep(lambda_w) {
            let r = brute_force_oracle(&pr, BatteryMode::Free, PowerGrid::geometric(200)).unwrap().outcome.throughput;
            assert!(r >= prev * 0.99, "lambda_ap {}: {r} < {prev}", pr.params.lambda_ap);
            assert!(r <= pr.max_throughput());
            prev = r;
        }
    }
}

#[test]
fn free_optimum_nondecreasing_within_low_and_high_regimes() {
    for lambda_w in [0.0012, 0.002] {
        for regime in [Regime::LowDensity, Regime::HighDensity] {
            let mut prev = 0.0;
            for pr in density_sweep(lambda_w).into_iter().filter(|p| p.free_regime() == regime) {
                let r = optimize_free(&pr).unwrap().throughput;
                assert!(r >= prev * (1.0 - 1e-9), "lambda_ap {}: {r} < {prev}", pr.params.lambda_ap);
                prev = r;
            }
        }
    }
}
