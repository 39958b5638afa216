use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qsw_core::discrimination::{binary_pair_paper, symmetric_ensemble, DiscriminationTask};
use qsw_core::dynamics::{build_liouvillian, CompactGenerator};
use qsw_core::schemes::{materialize, param_count, SchemeId, WalkParameters};
use qsw_core::topology::build_layered;

fn theta(n: usize) -> Vec<f64> {
    (0..n).map(|k| ((k * 7 % 13) as f64 - 6.0) / 6.0).collect()
}

fn objective(c: &mut Criterion) {
    let small = build_layered(2, 2, 2, false, false).unwrap();
    let large = build_layered(4, 4, 4, true, false).unwrap();
    let binary = DiscriminationTask::new(small, binary_pair_paper(), 0.5, 100.0, 1.0).unwrap();
    let fourary = DiscriminationTask::new(
        large,
        symmetric_ensemble(4, 0.7, 4).unwrap(),
        0.5,
        100.0,
        1.0,
    )
    .unwrap();

    let mut group = c.benchmark_group("prob_correct");
    for scheme in [SchemeId::A, SchemeId::C, SchemeId::D] {
        let t = theta(param_count(scheme, binary.topology()));
        group.bench_function(format!("2-2-2/{scheme}"), |b| {
            b.iter(|| binary.prob_correct(scheme, black_box(&t)).unwrap())
        });
        let t = theta(param_count(scheme, fourary.topology()));
        group.bench_function(format!("4r-4-4/{scheme}"), |b| {
            b.iter(|| fourary.prob_correct(scheme, black_box(&t)).unwrap())
        });
    }
    group.finish();
}

fn generators(c: &mut Criterion) {
    let topo = build_layered(4, 4, 4, true, false).unwrap();
    let t = theta(param_count(SchemeId::D, &topo));
    let wp = WalkParameters::new(materialize(SchemeId::D, &topo, &t).unwrap(), 0.5, 1.0).unwrap();

    c.bench_function("liouvillian/4r-4-4", |b| {
        b.iter(|| build_liouvillian(black_box(&wp), &topo).unwrap())
    });
    c.bench_function("compact_generator/4r-4-4", |b| {
        b.iter(|| CompactGenerator::new(black_box(&wp), &topo).unwrap())
    });
    let compact = CompactGenerator::new(&wp, &topo).unwrap();
    c.bench_function("compact_propagator/4r-4-4", |b| {
        b.iter(|| compact.propagator(black_box(100.0)).unwrap())
    });
}

criterion_group!(benches, objective, generators);
criterion_main!(benches);
