use criterion::{criterion_group, criterion_main, Criterion};
use slackfm_core::binopt::reduce_hubo_to_qubo;
use slackfm_core::seed::rng_from;
use slackfm_core::HofmModel;

fn reduce(c: &mut Criterion) {
    let hubo = HofmModel::random(20, 3, 0.5, &mut rng_from(6)).unwrap().to_hubo();
    c.bench_function("reduce/hofm_n20_k3", |b| {
        b.iter(|| reduce_hubo_to_qubo(&hubo, None).unwrap())
    });
}

criterion_group!(benches, reduce);
criterion_main!(benches);
