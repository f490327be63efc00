use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use osmc_bench::bench_grid;
use osmc_core::distance::all_source_bfs_subdivided;
use osmc_core::encoding::{build_encoding, ModeRequest};
use osmc_core::instance::subdivide;
use osmc_core::pattern::compute_binary_patterns;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn bfs_field(c: &mut Criterion) {
    let mut group = c.benchmark_group("source_bfs");
    for side in [20usize, 40] {
        let sub = subdivide(&bench_grid(side)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(side), &sub, |b, sub| {
            b.iter(|| black_box(all_source_bfs_subdivided(sub)));
        });
    }
    group.finish();
}

fn pattern_extraction(c: &mut Criterion) {
    let mut group = c.benchmark_group("binary_patterns");
    for side in [20usize, 40, 80] {
        let sub = subdivide(&bench_grid(side)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(side), &sub, |b, sub| {
            b.iter(|| black_box(compute_binary_patterns(sub).unwrap()));
        });
    }
    group.finish();
}

fn encode(c: &mut Criterion) {
    let mut group = c.benchmark_group("encode_general");
    group.sample_size(10);
    for side in [20usize, 40] {
        let inst = bench_grid(side);
        group.bench_with_input(BenchmarkId::from_parameter(side), &inst, |b, inst| {
            b.iter(|| black_box(build_encoding(inst, ModeRequest::General, 0).unwrap()));
        });
    }
    group.finish();
}

fn query(c: &mut Criterion) {
    let inst = bench_grid(40);
    let enc = build_encoding(&inst, ModeRequest::General, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let queries: Vec<(u32, usize)> = (0..1024)
        .map(|_| {
            (
                inst.terminals[rng.random_range(0..inst.terminals.len())],
                rng.random_range(1..=inst.k()),
            )
        })
        .collect();
    let mut at = 0usize;
    c.bench_function("query_grid40", |b| {
        b.iter(|| {
            let (v, i) = queries[at & 1023];
            at += 1;
            black_box(enc.query(v, i).unwrap())
        })
    });
}

criterion_group!(benches, bfs_field, pattern_extraction, encode, query);
criterion_main!(benches);
