use criterion::{black_box, criterion_group, criterion_main, Criterion};
use sharp_ald::exactnum::int;
use sharp_ald::mipsolve::solve_mip;
use sharp_ald::saldual::{certify, CertifyOptions, OracleGrid, SalrEvaluator};
use sharp_ald::valuefn::continuous_relaxation;
use sharp_ald::{corpus, Norm, Settings};

fn solvers(c: &mut Criterion) {
    let s = Settings::default();
    let milp = corpus::random_milp(7);
    let miqp = corpus::random_miqp(7);
    let pure = corpus::random_pure_integer(7);
    let picp = corpus::random_picp(7);

    c.bench_function("lp relaxation", |b| b.iter(|| continuous_relaxation(black_box(&milp), &s).unwrap()));
    c.bench_function("qp relaxation", |b| b.iter(|| continuous_relaxation(black_box(&miqp), &s).unwrap()));
    c.bench_function("milp branch and bound", |b| b.iter(|| solve_mip(black_box(&milp), &s).unwrap()));
    c.bench_function("miqp branch and bound", |b| b.iter(|| solve_mip(black_box(&miqp), &s).unwrap()));
    let ev = SalrEvaluator::new(&pure, Norm::L1, &OracleGrid::default(), &s).unwrap();
    c.bench_function("salr l1", |b| b.iter(|| ev.eval(black_box(&int(2))).unwrap()));
    c.bench_function("certify picp", |b| {
        b.iter(|| certify(black_box(&picp), Norm::L1, &CertifyOptions::default(), &s).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = solvers
}
criterion_main!(benches);
