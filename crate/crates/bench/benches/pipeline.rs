use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pastssm::semantics::Alphabet;
use pastssm::verify::check_model;
use pastssm::{accepts, compile_over, eval, NumericMode};
use pastssm_bench::{abc, build, fixtures, props};
use std::hint::black_box;

fn compile(c: &mut Criterion) {
    let mut g = c.benchmark_group("compile");
    for (text, policy) in fixtures() {
        let f = pastssm::parse(text).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(text), &f, |b, f| {
            b.iter(|| compile_over(black_box(f), policy, NumericMode::Exact, &props()).unwrap())
        });
    }
    g.finish();
}

fn run(c: &mut Criterion) {
    let mut g = c.benchmark_group("run");
    let trace = abc(50);
    for (text, policy) in fixtures() {
        let (f, ssm) = build(text, policy);
        for mode in ["exact", "fixed:12:4", "logp:4:auto"] {
            let m: NumericMode = mode.parse().unwrap();
            g.bench_function(BenchmarkId::new(mode, text), |b| {
                b.iter(|| accepts(&ssm, black_box(&trace), m).unwrap())
            });
        }
        g.bench_function(BenchmarkId::new("oracle", text), |b| {
            b.iter(|| eval(&f, black_box(&trace)))
        });
    }
    g.finish();
}

fn check(c: &mut Criterion) {
    let mut g = c.benchmark_group("check");
    g.sample_size(10);
    let alphabet = Alphabet::Singletons(props());
    for (text, policy) in fixtures() {
        let (f, ssm) = build(text, policy);
        g.bench_function(BenchmarkId::from_parameter(text), |b| {
            b.iter(|| check_model(&ssm, &f, NumericMode::Exact, &alphabet, 6, u64::MAX).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, compile, run, check);
criterion_main!(benches);
