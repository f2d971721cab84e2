use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use wpcn_core::battery::{rho_lb_markov, MarkovBoundConfig};
use wpcn_core::energy::EnergyDistribution;
use wpcn_core::numerics::{erfinv, qe};
use wpcn_core::optimize::{brute_force_oracle, optimize_free, PowerGrid};
use wpcn_core::simcore::{harvest_series, SimConfig};
use wpcn_core::uplink::{psuc_closed4, psuc_general};
use wpcn_core::{BatteryMode, NetworkParams, Problem};

fn special_functions(c: &mut Criterion) {
    c.bench_function("erfinv near 1", |b| b.iter(|| erfinv(black_box(1.0 - 1e-9)).unwrap()));
    c.bench_function("qe", |b| b.iter(|| qe(black_box(3.7))));
}

fn link_models(c: &mut Criterion) {
    let p = NetworkParams::reference();
    let dist = EnergyDistribution::new(&p, 60).unwrap();
    c.bench_function("ccdf_zf", |b| b.iter(|| dist.ccdf_zf(black_box(0.02)).unwrap()));
    c.bench_function("psuc closed form", |b| b.iter(|| psuc_closed4(&p, black_box(0.5), 60, 1e-3).unwrap()));
    c.bench_function("psuc quadrature", |b| b.iter(|| psuc_general(&p, black_box(0.5), 60, 1e-3).unwrap()));
}

fn battery(c: &mut Criterion) {
    let p = NetworkParams::reference();
    let cfg = MarkovBoundConfig::default();
    let mut g = c.benchmark_group("markov bound");
    g.sample_size(10);
    for cap in [0.1, 0.4, 1.2] {
        g.bench_function(format!("C = {cap}"), |b| {
            b.iter(|| rho_lb_markov(&p, 60, 0.02, black_box(cap), &cfg).unwrap())
        });
    }
    g.finish();
}

fn optimizers(c: &mut Criterion) {
    let pr = Problem::new(NetworkParams::reference()).unwrap();
    c.bench_function("optimize_free", |b| b.iter(|| optimize_free(black_box(&pr)).unwrap()));
    let mut g = c.benchmark_group("brute force");
    g.sample_size(10);
    g.bench_function("free, 200 powers", |b| {
        b.iter(|| brute_force_oracle(black_box(&pr), BatteryMode::Free, PowerGrid::uniform(200)).unwrap())
    });
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let p = NetworkParams::reference();
    let cfg = SimConfig::new(100.0, 200, 1).unwrap();
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    g.bench_function("spatial harvest, 200 frames", |b| b.iter(|| harvest_series(black_box(&cfg), &p, 60).unwrap()));
    g.finish();
}

criterion_group!(benches, special_functions, link_models, battery, optimizers, simulation);
criterion_main!(benches);
