//! Sequential (one-thread pool) against the default rayon pool.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankabstain::eval::{cross_validate, Method, QGrid};
use rankabstain::parallel;
use rankabstain::synth::{synth, Generator, SynthSpec};
use rankabstain::{predict_probabilistic, LearnerConfig, MallowsModel, PreferenceModel, Ranking, Threshold};

fn models(n: usize) -> Vec<PreferenceModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    (0..n)
        .map(|_| {
            let m = rng.random_range(3..=7);
            let theta = rng.random_range(0.0..10.0);
            MallowsModel::new(Ranking::random(m, &mut rng), theta).unwrap().into()
        })
        .collect()
}

fn pools() -> [(&'static str, rayon::ThreadPool); 2] {
    [
        ("sequential", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ]
}

fn partial_orders(c: &mut Criterion) {
    let batch = models(1000);
    let q = Threshold::new(0.7).unwrap();
    let mut group = c.benchmark_group("partial_orders");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| parallel::map(&batch, |m| predict_probabilistic(m, q).unwrap().repaired)))
        });
    }
    group.finish();
}

fn cross_validation(c: &mut Criterion) {
    let spec = SynthSpec { generator: Generator::PlLinear { weight_scale: 1.0 }, instances: 300, labels: 5, dims: 2 };
    let data = synth(&spec, 1).unwrap();
    let cfg = LearnerConfig::default();
    let grid = QGrid::default();
    let mut group = c.benchmark_group("cross_validation");
    group.sample_size(10);
    for method in [Method::PlackettLuce, Method::Baseline] {
        for (name, pool) in pools() {
            group.bench_function(BenchmarkId::new(method.tag(), name), |b| {
                b.iter(|| pool.install(|| cross_validate(&data, 5, method, &cfg, &grid).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, partial_orders, cross_validation);
criterion_main!(benches);
