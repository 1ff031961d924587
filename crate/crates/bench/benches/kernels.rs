use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ihtlab::asymptotics::{tail_if, tail_il, tail_iu, TailInputs, UnionExponent};
use ihtlab::rip::{rip_exact, RipBoundProvider};
use ihtlab::solvers::{run_iht, run_niht};
use ihtlab::transitions::{default_delta_grid, rho_hat_curve, rho_hat_iht, CurveSpec};
use ihtlab::{hard_threshold, CoefficientModel, DVector, ProblemInstance, RngSpec, SolverConfig};
use rand::Rng;

fn bench_hard_threshold(c: &mut Criterion) {
    let mut group = c.benchmark_group("hard_threshold");
    let mut rng = RngSpec::new(1, 0).rng();
    for &len in &[1_000usize, 100_000] {
        let x = DVector::from_fn(len, |_, _| rng.random::<f64>() - 0.5);
        group.bench_with_input(BenchmarkId::from_parameter(len), &x, |b, x| {
            b.iter(|| hard_threshold(black_box(x), len / 20).unwrap())
        });
    }
    group.finish();
}

fn bench_solvers(c: &mut Criterion) {
    let inst = ProblemInstance::random(200, 400, 10, 0.0, CoefficientModel::Gaussian, RngSpec::new(2, 0)).unwrap();
    let iht = SolverConfig::iht(0.65);
    let niht = SolverConfig::niht(1.1, 0.05);
    c.bench_function("iht n=200 N=400 k=10", |b| b.iter(|| run_iht(black_box(&inst), &iht).unwrap()));
    c.bench_function("niht n=200 N=400 k=10", |b| b.iter(|| run_niht(black_box(&inst), &niht).unwrap()));
}

fn bench_rip_exact(c: &mut Criterion) {
    let inst = ProblemInstance::random(12, 18, 2, 0.0, CoefficientModel::Gaussian, RngSpec::new(3, 0)).unwrap();
    c.bench_function("rip_exact 12x18 s=4", |b| b.iter(|| rip_exact(black_box(&inst.a), 4).unwrap()));
}

fn bench_tail_roots(c: &mut Criterion) {
    let inputs = TailInputs::new(0.5, 0.1, 0.75).unwrap();
    let e = UnionExponent::Unscaled;
    c.bench_function("tail roots", |b| {
        b.iter(|| {
            let i = black_box(inputs);
            (
                tail_iu(i, e).unwrap().value,
                tail_il(i, e).unwrap().value,
                tail_if(i.delta, i.rho, e).unwrap().value,
            )
        })
    });
}

fn bench_rho_hat(c: &mut Criterion) {
    let provider = RipBoundProvider::default_gaussian();
    let e = UnionExponent::Unscaled;
    c.bench_function("rho_hat_iht delta=0.5", |b| {
        b.iter(|| rho_hat_iht(black_box(0.5), &provider, e).unwrap())
    });
    let grid = default_delta_grid();
    c.bench_function("rho_hat curve 100 deltas", |b| {
        b.iter(|| rho_hat_curve(black_box(&grid), CurveSpec::Iht, &provider, e).unwrap())
    });
}

criterion_group!(
    benches,
    bench_hard_threshold,
    bench_solvers,
    bench_rip_exact,
    bench_tail_roots,
    bench_rho_hat
);
criterion_main!(benches);
