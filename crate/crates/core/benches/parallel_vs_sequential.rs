use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kacrice_core::grf::{kostlan_model, sample_stream};
use kacrice_core::kacrice::{expected_count, LevelSetW, McParams, Region, WeightFn};
use kacrice_core::oracle::{count_zeros_circle, mc_expected_count};
use kacrice_core::par;

fn zero_counting(c: &mut Criterion) {
    let model = Arc::new(kostlan_model(1, 25, 1).unwrap());
    let n = 64;
    let count = |i: usize| count_zeros_circle(&sample_stream(&model, 1, i as u64), 1024, 1e-12).count;
    let mut group = c.benchmark_group("zero_counting");
    group.bench_function("map_indexed", |b| b.iter(|| black_box(par::map_indexed(n, count))));
    group.bench_function("map_indexed_seq", |b| b.iter(|| black_box(par::map_indexed_seq(n, count))));
    group.finish();
}

fn pool_sizes(c: &mut Criterion) {
    let model = Arc::new(kostlan_model(1, 9, 1).unwrap());
    let w = LevelSetW::point(&[0.0]);
    let mc = McParams { n_samples: 1024, fiber_nodes: 4, seed: 3 };
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut group = c.benchmark_group("pool_size");
    group.sample_size(10);
    for threads in [1, max] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        group.bench_with_input(BenchmarkId::new("oracle_mc", threads), &threads, |b, _| {
            b.iter(|| pool.install(|| black_box(mc_expected_count(&model, |r| count_zeros_circle(r, 512, 1e-12), 64, 5))))
        });
        group.bench_with_input(BenchmarkId::new("expected_count", threads), &threads, |b, _| {
            b.iter(|| {
                pool.install(|| {
                    black_box(expected_count(&model, &w, &Region::Circle { nodes: 16 }, &mc, &WeightFn::unit()).unwrap())
                })
            })
        });
        if max == 1 {
            break;
        }
    }
    group.finish();
}

criterion_group!(benches, zero_counting, pool_sizes);
criterion_main!(benches);
