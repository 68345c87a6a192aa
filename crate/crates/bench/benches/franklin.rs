use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dvkit::decompose::{check_sum, decomposability_report, kernel_image_check, LinkContext, WitnessSet};
use dvkit::franklin::{build_franklin, certify_rationality_link, verify_abs_identity};
use dvkit::gallery::gallery_space;
use dvkit::{ClassifyContext, Grid, LinearMap, Subspace};

fn franklin(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_franklin");
    g.sample_size(10);
    for n in [4, 8, 16] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| build_franklin(black_box(n)).unwrap()));
    }
    g.finish();
}

fn identity(c: &mut Criterion) {
    let f = Arc::new(build_franklin(16).unwrap());
    let grid = Grid { rationals: 200, matched: 16, negatives: 20, seed: 0 };
    let link = certify_rationality_link(&f, &grid);
    let mut g = c.benchmark_group("identity");
    g.sample_size(10);
    g.bench_function("link_n16", |b| b.iter(|| certify_rationality_link(&f, black_box(&grid))));
    g.bench_function("verify_n16", |b| b.iter(|| verify_abs_identity(&f, &link, black_box(&grid)).unwrap()));
    let v = gallery_space("V2-delta").unwrap();
    let ctx = LinkContext::new(f.clone(), grid);
    let ws = WitnessSet::abs_from_delta(&v, ctx);
    g.bench_function("check_sum_v2_delta", |b| {
        b.iter(|| check_sum(&v, &Subspace::coords(2, &[1]), &Subspace::coords(2, &[2]), &ws, &ClassifyContext::default()).unwrap())
    });
    g.finish();
}

fn analysis(c: &mut Criterion) {
    let none = ClassifyContext::default();
    let a = ClassifyContext::with_axioms(&["A"]);
    let empty = WitnessSet::empty();
    let mut g = c.benchmark_group("analysis");
    for (name, ctx) in [("V2-delta", &none), ("R3-abs", &none), ("W-nondecomposable", &a), ("gamma-pair", &a)] {
        let v = gallery_space(name).unwrap();
        g.bench_function(format!("decomposability/{name}"), |b| b.iter(|| decomposability_report(&v, &empty, ctx).unwrap()));
    }
    let r3 = gallery_space("R3-abs").unwrap();
    let f = LinearMap::parse("[[1,0,0],[0,1,0],[0,0,0]]").unwrap();
    g.sample_size(10);
    g.bench_function("kernel_image/R3-abs", |b| b.iter(|| kernel_image_check(&r3, &f, &empty, &none).unwrap()));
    g.finish();
}

criterion_group!(benches, franklin, identity, analysis);
criterion_main!(benches);
