use criterion::{criterion_group, criterion_main, Criterion};
use predprey::analysis::{classify_regime, run_ensemble, ClassifyOptions, EstimatorConfig};
use predprey::model::{jump_integral, RateKind, Species, Transform};
use predprey::{fixtures, RngSpec, SolverConfig, TimeFunction};
use std::hint::black_box;

fn classify(c: &mut Criterion) {
    let opts = ClassifyOptions::default();
    let constant = fixtures::gap();
    let mut periodic = fixtures::baseline();
    periodic.predator.a = TimeFunction::sinusoidal(0.5, 0.2, 1.0, 0.0);
    c.bench_function("classify_constant", |b| {
        b.iter(|| classify_regime(black_box(&constant), &opts).unwrap())
    });
    c.bench_function("classify_sinusoidal", |b| {
        b.iter(|| classify_regime(black_box(&periodic), &opts).unwrap())
    });
}

fn quadrature(c: &mut Criterion) {
    let spec = fixtures::baseline();
    let kernel = &spec.prey.gamma;
    c.bench_function("jump_integral_uniform_marks", |b| {
        b.iter(|| jump_integral(kernel, &spec.pi1, black_box(2.0), Transform::XMinusLog1p).unwrap())
    });
    c.bench_function("time_average_q2", |b| {
        b.iter(|| {
            predprey::model::time_average(&spec, RateKind::Q(Species::Predator), 200.0, 2000)
                .unwrap()
        })
    });
}

fn ensemble(c: &mut Criterion) {
    let spec = fixtures::baseline();
    let cfg = SolverConfig::new(1e-2, 10.0, RngSpec::new(1, 0));
    let est = EstimatorConfig::default();
    let mut g = c.benchmark_group("ensemble");
    g.sample_size(10);
    g.bench_function("baseline_256_paths_T10", |b| {
        b.iter(|| run_ensemble(&spec, &cfg, 256, &est).unwrap())
    });
    g.finish();
}

criterion_group!(benches, classify, quadrature, ensemble);
criterion_main!(benches);
