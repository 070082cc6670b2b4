use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use symbill_bench::{ellipse, ellipsoid_4d, pball, start};
use symbill_core::duality::HamiltonianAtInfinity;
use symbill_core::dynamics::{flow, reflect, t2, Side, DEFAULT_FLOW_TOL};
use symbill_core::experiments::constants_estimate;
use symbill_core::{ExperimentOptions, SolverSettings};

fn reflection(c: &mut Criterion) {
    let settings = SolverSettings::default();
    let mut g = c.benchmark_group("reflect");
    for (name, body) in [("ellipse", ellipse()), ("ellipsoid_4d", ellipsoid_4d()), ("pball", pball())] {
        let x = start(&body, 10.0);
        g.bench_function(name, |b| {
            b.iter(|| reflect(&body, black_box(&x), &settings, None, Side::Minus).unwrap())
        });
    }
    g.finish();
}

fn double_step(c: &mut Criterion) {
    let settings = SolverSettings::default();
    let mut g = c.benchmark_group("t2");
    for (name, body) in [("ellipse", ellipse()), ("ellipsoid_4d", ellipsoid_4d())] {
        let x = start(&body, 50.0);
        g.bench_function(name, |b| b.iter(|| t2(&body, black_box(&x), &settings).unwrap()));
    }
    g.finish();
}

fn hamiltonian_flow(c: &mut Criterion) {
    let body = ellipsoid_4d();
    let h = HamiltonianAtInfinity::new(&body);
    let x = start(&body, 10.0);
    c.bench_function("flow/ellipsoid_4d/t=1", |b| {
        b.iter(|| flow(&h, black_box(&x), 1.0, DEFAULT_FLOW_TOL).unwrap())
    });
}

fn constants(c: &mut Criterion) {
    let body = ellipse();
    let opts = ExperimentOptions::default();
    let mut g = c.benchmark_group("constants");
    g.sample_size(10);
    g.bench_function("ellipse/400", |b| {
        b.iter(|| constants_estimate(&body, 400, &[3], &opts).unwrap())
    });
    g.finish();
}

criterion_group!(benches, reflection, double_step, hamiltonian_flow, constants);
criterion_main!(benches);
