//! Benchmarks comparing the rayon kernels against their sequential twins
//! on the two hot inner loops: per-edge corrugation and the all-pairs
//! segment separation scan. Both paths produce identical results; the
//! suite measures the strategy overhead and speedup on this machine.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use impoly::complex::build_complex;
use impoly::engine1d::{positive_engine, sawtooth_edge, EngineRequest};
use impoly::forms::{EdgeMetric, MinkowskiSignature, PLMap};
use impoly::geometry::segment_distance;
use impoly::par;

struct EdgeJob {
    a: Vec<f64>,
    b: Vec<f64>,
    target: f64,
    teeth: usize,
    normal: Vec<f64>,
}

fn edge_jobs(n: usize) -> Vec<EdgeJob> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..n)
        .map(|_| {
            let a = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0];
            let d: f64 = rng.gen_range(0.1..0.9);
            let phi: f64 = rng.gen_range(0.0..6.28);
            let b = vec![a[0] + d * phi.cos(), a[1] + d * phi.sin(), 0.0];
            EdgeJob {
                a,
                b,
                target: rng.gen_range(1.0..3.0),
                teeth: rng.gen_range(8..64),
                normal: vec![0.0, 0.0, 1.0],
            }
        })
        .collect()
}

/// Segments from a real engine run: a corrugated cycle graph.
fn engine_segments(edges: usize, eps: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = edges;
    let simplices: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
    let x = build_complex(&(0..n).collect::<Vec<_>>(), &simplices).unwrap();
    let images: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let phi = i as f64 / n as f64 * std::f64::consts::TAU;
            vec![phi.cos(), phi.sin()]
        })
        .collect();
    let f = PLMap::new(x.clone(), MinkowskiSignature::new(2, 0).unwrap(), images).unwrap();
    let targets = EdgeMetric::from_fn(&x, |_, _| 4.0);
    let res = positive_engine(EngineRequest {
        map: &f,
        targets: &targets,
        base_vertex: 0,
        epsilons: &[eps],
        seed: 3,
    })
    .unwrap();
    res.map
        .complex
        .edges()
        .into_iter()
        .map(|(u, w)| (res.map.image(u).to_vec(), res.map.image(w).to_vec()))
        .collect()
}

fn bench_corrugation(c: &mut Criterion) {
    let mut group = c.benchmark_group("corrugate_edges");
    for n in [64usize, 512] {
        let jobs = edge_jobs(n);
        let work = |job: &EdgeJob| {
            sawtooth_edge(&job.a, &job.b, job.target, job.teeth, &job.normal)
                .unwrap()
                .len()
        };
        group.bench_with_input(BenchmarkId::new("rayon", n), &jobs, |bench, jobs| {
            bench.iter(|| par::map_collect(jobs, work).iter().sum::<usize>())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &jobs, |bench, jobs| {
            bench.iter(|| par::map_collect_seq(jobs, work).iter().sum::<usize>())
        });
    }
    group.finish();
}

fn bench_min_separation(c: &mut Criterion) {
    let mut group = c.benchmark_group("pairwise_min_separation");
    group.sample_size(10);
    for eps in [0.3f64, 0.1] {
        let segments = engine_segments(12, eps);
        let n = segments.len();
        let score = |i: usize, j: usize| {
            let (a1, b1) = &segments[i];
            let (a2, b2) = &segments[j];
            segment_distance(a1, b1, a2, b2)
        };
        group.bench_with_input(
            BenchmarkId::new("rayon", n),
            &n,
            |bench, &n| bench.iter(|| par::pairwise_min(n, score)),
        );
        group.bench_with_input(
            BenchmarkId::new("sequential", n),
            &n,
            |bench, &n| bench.iter(|| par::pairwise_min_seq(n, score)),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_corrugation, bench_min_separation);
criterion_main!(benches);
