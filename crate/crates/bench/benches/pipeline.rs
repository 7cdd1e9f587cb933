use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fmm2d_bench::points;
use fmm2d_cli::DistKind;
use fmm2d_core::{direct_evaluate, fmm_evaluate, TreeConfig};

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    group.sample_size(10);
    for kind in [DistKind::Uniform, DistKind::Normal] {
        for n in [10_000, 100_000] {
            let pts = points(kind, n);
            let id = BenchmarkId::new(format!("fmm_{}", kind.name()), n);
            group.bench_with_input(id, &pts, |b, pts| {
                b.iter(|| black_box(fmm_evaluate(pts, &TreeConfig::default()).unwrap()))
            });
        }
    }
    for n in [1_000, 4_000] {
        let pts = points(DistKind::Uniform, n);
        group.bench_with_input(BenchmarkId::new("direct", n), &pts, |b, pts| {
            b.iter(|| black_box(direct_evaluate(pts, false)))
        });
    }
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
