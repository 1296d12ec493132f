use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use swarmtrack::fitness::fitness_or_infinity;
use swarmtrack::{evaluate, optimize, orbit_bounds, propagate, solve, GravityModel, OrbitBox, SwarmConfig};
use swarmtrack_bench::{default_campaign, nudged_truth, random_matrix};

fn assignment(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    for (rows, cols) in [(4, 3), (12, 10), (60, 50)] {
        let m = random_matrix(rows, cols, 7);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{rows}x{cols}")), &m, |b, m| {
            b.iter(|| solve(black_box(m)))
        });
    }
    group.finish();
}

fn propagation(c: &mut Criterion) {
    let set = default_campaign();
    let el = set.truth.elements[3];
    let g = GravityModel::default();
    c.bench_function("propagate", |b| b.iter(|| propagate(black_box(&el), black_box(123_456.0), &g)));
}

fn fitness(c: &mut Criterion) {
    let set = default_campaign();
    let candidate = nudged_truth(&set);
    c.bench_function("evaluate/default_campaign", |b| {
        b.iter(|| evaluate(black_box(&candidate), &set.observations))
    });
}

fn swarm_iteration(c: &mut Criterion) {
    let set = default_campaign();
    let obs = &set.observations;
    let bounds = orbit_bounds(obs.targets(), &OrbitBox::default()).unwrap();
    let f = |x: &[f64]| match swarmtrack::Candidate::from_flat(x, 0.0) {
        Ok(c) => fitness_or_infinity(&c, obs),
        Err(_) => f64::INFINITY,
    };
    let config = SwarmConfig {
        iterations: 1,
        ..SwarmConfig::default()
    };
    let mut group = c.benchmark_group("swarm");
    group.sample_size(10);
    group.bench_function("one_iteration/default_campaign", |b| {
        b.iter(|| optimize(&f, &bounds, black_box(&config), &[], None).unwrap())
    });
    group.finish();
}

criterion_group!(benches, assignment, propagation, fitness, swarm_iteration);
criterion_main!(benches);
