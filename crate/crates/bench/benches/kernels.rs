use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use slconvex_core::convexity::{acoustic_tensor, dfz_check, e_matrix_sweep, rank_one_oracle};
use slconvex_core::energy::lookup;
use slconvex_core::exprparse::parse;
use slconvex_core::sampling::{random_sl2, random_unit, sample_rng};
use slconvex_core::tensor2::{det_expand, singular_values, tangent_basis};
use slconvex_core::{analyze, AnalysisConfig, Domain, Mat2};

fn tensor_kernels(c: &mut Criterion) {
    let mut rng = sample_rng(1, 0);
    let f = random_sl2(&mut rng, 4f64.ln());
    let h = random_sl2(&mut rng, 4f64.ln());
    let eta = random_unit(&mut rng);
    c.bench_function("singular_values", |b| b.iter(|| singular_values(black_box(&f))));
    c.bench_function("det_expand", |b| b.iter(|| det_expand(black_box(&f), black_box(&h))));
    c.bench_function("tangent_basis", |b| {
        b.iter(|| tangent_basis(black_box(&f), black_box(eta)))
    });
    let psi = lookup("exp-shear").unwrap().psi();
    c.bench_function("acoustic_tensor", |b| {
        b.iter(|| acoustic_tensor(&psi, black_box(&f), black_box(eta)))
    });
}

fn parser(c: &mut Criterion) {
    let src = "log(1 + 0.5*gamma^2 + 1.25*gamma^4) - sqrt(abs(gamma - 1))";
    c.bench_function("parse", |b| b.iter(|| parse(black_box(src), &["gamma"])));
    let e = parse(src, &["gamma"]).unwrap();
    c.bench_function("eval", |b| b.iter(|| e.eval(black_box(&[1.7]))));
    c.bench_function("derivative", |b| b.iter(|| black_box(&e).derivative(0)));
}

fn criteria(c: &mut Criterion) {
    let cfg = AnalysisConfig::default();
    let entry = lookup("quartic-shear").unwrap();
    let phi = entry.spec.to_shear_phi();
    let psi = entry.psi();
    c.bench_function("dfz_check", |b| b.iter(|| dfz_check(&phi, &cfg)));
    c.bench_function("e_matrix_sweep", |b| b.iter(|| e_matrix_sweep(&psi, &cfg, &|_| false)));
    let small = AnalysisConfig { n_f: 50, ..cfg.clone() };
    let w = |f: &Mat2| entry.spec.eval(f);
    c.bench_function("rank_one_oracle_50", |b| {
        b.iter(|| rank_one_oracle(&w, &small, Domain::Sl2, "oracle"))
    });
    let mut group = c.benchmark_group("analyze");
    group.sample_size(10);
    group.bench_function("sl2_default", |b| b.iter(|| analyze(&entry.spec, Domain::Sl2, &cfg)));
    group.finish();
}

criterion_group!(benches, tensor_kernels, parser, criteria);
criterion_main!(benches);
