use std::hint::black_box;

use berw_core::lattice::{run, VisitedSet};
use berw_core::linalg::SymMatrix;
use berw_core::martingale::{build_m423_seeded, BridgeSampler};
use berw_core::{RngStream, WalkSpec};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};

fn engine(c: &mut Criterion) {
    let mut g = c.benchmark_group("engine");
    const STEPS: u64 = 1 << 16;
    g.throughput(Throughput::Elements(STEPS));
    for (d, d1, d2) in [(4, 2, 2), (4, 2, 3), (4, 4, 2), (7, 4, 4)] {
        let spec = WalkSpec::new(d, d1, d2).unwrap();
        g.bench_function(format!("run {spec}"), |b| {
            let mut i = 0;
            b.iter(|| {
                i += 1;
                let mut rng = RngStream::new(1, i);
                black_box(run(&spec, STEPS, &mut rng, &mut []).unwrap().state.range)
            })
        });
    }
    g.bench_function("build_m423", |b| {
        let mut i = 0;
        b.iter(|| {
            i += 1;
            black_box(build_m423_seeded(STEPS, &RngStream::new(2, i)).unwrap().tau.len())
        })
    });
    g.finish();
}

fn visited(c: &mut Criterion) {
    let mut g = c.benchmark_group("visited_set");
    let mut rng = RngStream::new(3, 0);
    let sites: Vec<[i64; 4]> = (0..1 << 16)
        .map(|_| {
            let mut p = [0i64; 4];
            for x in &mut p {
                *x = (berw_core::UniformSource::below(&mut rng, 512) as i64) - 256;
            }
            p
        })
        .collect();
    g.throughput(Throughput::Elements(sites.len() as u64));
    g.bench_function("insert 4d", |b| {
        b.iter_batched(
            || VisitedSet::new(4),
            |mut s| {
                for p in &sites {
                    s.insert(p);
                }
                s.len()
            },
            BatchSize::LargeInput,
        )
    });
    g.finish();
}

fn jacobi(c: &mut Criterion) {
    let mut rng = RngStream::new(4, 0);
    let rows: Vec<Vec<f64>> = (0..8)
        .map(|_| (0..8).map(|_| rng.unit_f64() * 2.0 - 1.0).collect())
        .collect();
    let m = SymMatrix::symmetrized(&rows).unwrap();
    c.bench_function("jacobi 8x8", |b| b.iter(|| black_box(m.eigen(1e-12).unwrap().values[0])));
}

fn bridge(c: &mut Criterion) {
    let sampler = BridgeSampler::new(1 << 14).unwrap();
    let mut rng = RngStream::new(5, 0);
    c.bench_function("bridge 2^14", |b| b.iter(|| black_box(sampler.sample(&mut rng).a)));
}

criterion_group!(benches, engine, visited, jacobi, bridge);
criterion_main!(benches);
