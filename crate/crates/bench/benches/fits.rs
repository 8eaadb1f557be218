use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use strands_bench::draw;
use strands_core::{
    cv_select, fit_path, lambda_grid_auto, rlasso_fit, strands_fit, CvConfig, PenaltySpec, RandomLassoConfig,
    SeedStream, StrandsConfig,
};

fn solver(c: &mut Criterion) {
    let data = draw("example3", 1);
    let ds = &data.dataset;
    let lasso = PenaltySpec::Lasso;
    let grid = lambda_grid_auto(ds, &lasso, 100, 1e-3).unwrap();
    c.bench_function("lasso_path_n100_p40", |b| b.iter(|| fit_path(black_box(ds), &lasso, &grid).unwrap()));
    let enet = PenaltySpec::elastic_net(0.5).unwrap();
    let enet_grid = lambda_grid_auto(ds, &enet, 100, 1e-3).unwrap();
    c.bench_function("enet_cv_n100_p40", |b| {
        b.iter(|| cv_select(black_box(ds), &enet, &enet_grid, &CvConfig::default(), &SeedStream::new(3)).unwrap())
    });

    let wide = draw("example7", 1);
    let grid = lambda_grid_auto(&wide.dataset, &lasso, 100, 1e-2).unwrap();
    c.bench_function("lasso_cv_wide", |b| {
        b.iter(|| cv_select(black_box(&wide.dataset), &lasso, &grid, &CvConfig::default(), &SeedStream::new(3)).unwrap())
    });
}

fn ensembles(c: &mut Criterion) {
    let data = draw("example3", 1);
    let mut group = c.benchmark_group("ensembles");
    group.sample_size(10);
    let config = StrandsConfig {
        iterations: 50,
        ..StrandsConfig::default()
    };
    group.bench_function("strands_b50", |b| {
        b.iter(|| strands_fit(black_box(&data.dataset), &config, &SeedStream::new(5)).unwrap())
    });
    let mut rl = RandomLassoConfig::default_for(data.dataset.p());
    rl.iterations = 50;
    rl.q1_grid = vec![16];
    rl.q2_grid = vec![16];
    group.bench_function("rlasso_b50_fixed_q", |b| {
        b.iter(|| rlasso_fit(black_box(&data.dataset), &rl, &SeedStream::new(5)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, solver, ensembles);
criterion_main!(benches);
