use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use trisheet::gamma::GammaOptions;
use trisheet::{
    build_config, build_curve, params_from_r0, re_i, solve_hp, solve_r0, trace_gamma, Complex64, CurveParams,
};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn roots(c: &mut Criterion) {
    let cfg = build_config(re(-1.0), re(1.0), re(-0.375), re(0.5)).unwrap();
    let cur = build_curve(cfg.clone(), CurveParams::new(re(0.0776), re(-0.3938))).unwrap();
    c.bench_function("dtilde_roots", |b| b.iter(|| black_box(&cur.dtilde).roots(1e-8).unwrap()));
    c.bench_function("build_curve", |b| {
        b.iter(|| build_curve(black_box(cfg.clone()), CurveParams::new(re(0.0776), re(-0.3938))).unwrap())
    });
}

fn periods(c: &mut Criterion) {
    let cfg = build_config(re(-1.0), re(1.0), re(-0.375), re(0.5)).unwrap();
    let g = params_from_r0(&cfg, re(0.0775)).unwrap();
    c.bench_function("re_i", |b| b.iter(|| re_i(black_box(&cfg), &g).unwrap()));
    let mut group = c.benchmark_group("slow");
    group.sample_size(10);
    group.bench_function("solve_r0", |b| b.iter(|| solve_r0(black_box(&cfg), (0.05, 0.10), 1e-10).unwrap()));
    group.finish();
}

fn hp(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_hp");
    group.sample_size(10);
    for n in [5, 10, 20] {
        group.bench_function(format!("n={n}"), |b| {
            b.iter(|| solve_hp(re(-2.0), re(4.0), re(-1.0), re(1.0), black_box((n, n))).unwrap())
        });
    }
    group.finish();
}

fn gamma(c: &mut Criterion) {
    let cfg = build_config(re(-1.0), re(1.0), re(-0.375), re(0.5)).unwrap();
    let cur = build_curve(cfg, CurveParams::new(re(0.0776), re(-0.3938))).unwrap();
    let opts = GammaOptions {
        step: Some(1e-2),
        ..GammaOptions::default()
    };
    let mut group = c.benchmark_group("trace_gamma");
    group.sample_size(10);
    group.bench_function("step=1e-2", |b| b.iter(|| trace_gamma(black_box(&cur), &opts).unwrap()));
    group.finish();
}

criterion_group!(benches, roots, periods, hp, gamma);
criterion_main!(benches);
