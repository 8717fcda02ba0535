use std::hint::black_box;

use anfis_bench::{dataset, grid_model, series};
use anfis_core::{
    build_design_matrix, embed, premise_gradient, solve_consequents_lse, EmbeddingSpec, MfFamily,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn inference(c: &mut Criterion) {
    let ds = dataset(2_100);
    let mut group = c.benchmark_group("evaluate_batch");
    for family in [MfFamily::Gaussian, MfFamily::Bell] {
        let model = grid_model(&ds, 3, family);
        group.bench_with_input(BenchmarkId::from_parameter(family), &model, |b, m| {
            b.iter(|| m.evaluate_batch(black_box(&ds.inputs)).unwrap());
        });
    }
    group.finish();
}

fn consequent_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("design_and_lstsq");
    group.sample_size(10);
    for samples in [1_100usize, 4_100] {
        let ds = dataset(samples);
        let model = grid_model(&ds, 3, MfFamily::Gaussian);
        group.bench_with_input(BenchmarkId::from_parameter(ds.len()), &ds, |b, ds| {
            b.iter(|| {
                let design = build_design_matrix(&model, &ds.inputs).unwrap();
                solve_consequents_lse(&design, &ds.targets).unwrap()
            });
        });
    }
    group.finish();
}

fn gradient(c: &mut Criterion) {
    let ds = dataset(2_100);
    let mut model = grid_model(&ds, 3, MfFamily::Gaussian);
    let design = build_design_matrix(&model, &ds.inputs).unwrap();
    let theta = solve_consequents_lse(&design, &ds.targets).unwrap().x;
    model.set_stacked_consequents(&theta).unwrap();
    c.bench_function("premise_gradient/2000", |b| {
        b.iter(|| premise_gradient(black_box(&model), &ds.inputs, &ds.targets).unwrap());
    });
}

fn embedding(c: &mut Criterion) {
    let s = series(17_000);
    let mut group = c.benchmark_group("embed");
    for (lags, horizon) in [(1usize, 100usize), (4, 288)] {
        let spec = EmbeddingSpec::new(lags, 1, horizon).unwrap();
        group.bench_with_input(
            BenchmarkId::new("17000", format!("D{lags}_P{horizon}")),
            &spec,
            |b, spec| {
                b.iter(|| embed(black_box(&s), *spec).unwrap());
            },
        );
    }
    group.finish();
}

criterion_group!(benches, inference, consequent_solve, gradient, embedding);
criterion_main!(benches);
