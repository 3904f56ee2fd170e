use criterion::{criterion_group, criterion_main, Criterion};
use slackfm_core::seed::rng_from;
use slackfm_core::{solve, AnnealConfig, FmModel};

fn anneal(c: &mut Criterion) {
    let mut g = c.benchmark_group("anneal");
    g.sample_size(10);

    let q15 = FmModel::random(15, 4, 1.0, &mut rng_from(1)).unwrap().to_qubo();
    let cfg = AnnealConfig {
        num_reads: 100,
        ..AnnealConfig::default()
    };
    g.bench_function("n15_100reads", |b| b.iter(|| solve(&q15, &cfg).unwrap()));

    // Unseen-combination layout: two 40-way drug blocks and two 4-way dose blocks.
    let q88 = FmModel::random(88, 4, 0.3, &mut rng_from(2)).unwrap().to_qubo();
    let groups = vec![
        (0..40).collect(),
        (40..44).collect(),
        (44..84).collect(),
        (84..88).collect(),
    ];
    let cfg = AnnealConfig {
        num_reads: 20,
        one_hot_groups: groups,
        ..AnnealConfig::default()
    };
    g.bench_function("n88_one_hot_20reads", |b| b.iter(|| solve(&q88, &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, anneal);
criterion_main!(benches);
