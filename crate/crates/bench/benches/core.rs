use criterion::{criterion_group, criterion_main, Criterion};
use hubsim_core::contact_data::surrogate;
use hubsim_core::netmetrics::path_metrics;
use hubsim_core::{generate_dc, run_to_completion, DiseaseParams, InterventionPolicy, PolicyKind};

fn bench_generate(c: &mut Criterion) {
    let degrees = surrogate::diary_like();
    c.bench_function("generate_dc", |b| {
        b.iter(|| generate_dc(&degrees, 0.5, 7).unwrap())
    });
}

fn bench_paths(c: &mut Criterion) {
    let (net, _) = generate_dc(&surrogate::diary_like(), 0.5, 7).unwrap();
    c.bench_function("path_metrics", |b| b.iter(|| path_metrics(&net)));
}

fn bench_epidemic(c: &mut Criterion) {
    let (net, _) = generate_dc(&surrogate::diary_like(), 0.5, 7).unwrap();
    let params = DiseaseParams::with_transmission(0.07, 0.02);
    let hub = InterventionPolicy::new(PolicyKind::HubTarget, 5);
    c.bench_function("run_to_completion", |b| {
        b.iter(|| run_to_completion(&net, &params, &hub, 3, 365).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_generate, bench_paths, bench_epidemic
}
criterion_main!(benches);
