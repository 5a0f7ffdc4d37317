use criterion::{criterion_group, criterion_main, Criterion};
use ellischub::exactseries::{rat, EvalPoint, HalfMonomial, Var};
use ellischub::theta::{delta_series, expr_eval, four_term_sides};
use ellischub::{ellclasses, transforms, RootDatum};
use std::hint::black_box;

fn bench_delta(c: &mut Criterion) {
    let p = EvalPoint::new([(Var::Z(1), rat(7, 3)), (Var::Z(2), rat(5, 11))]);
    let a = HalfMonomial::var(Var::Z(1));
    let b = HalfMonomial::var(Var::Z(2));
    c.bench_function("delta_series order 4", |bch| {
        bch.iter(|| delta_series(black_box(&a), black_box(&b), &p, 4).unwrap())
    });
}

fn bench_four_term(c: &mut Criterion) {
    let (l, _) = four_term_sides();
    let p = EvalPoint::random(&l.vars(), 3);
    c.bench_function("four-term side order 4", |bch| {
        bch.iter(|| expr_eval(black_box(&l), &p, 4).unwrap())
    });
}

fn bench_gl3(c: &mut Criterion) {
    let d = RootDatum::gl(3);
    c.bench_function("gl3 class table", |bch| bch.iter(|| ellclasses::table(black_box(&d)).unwrap()));
    c.bench_function("gl3 transformation forms", |bch| {
        bch.iter(|| transforms::m_forms(black_box(&d)).unwrap())
    });
}

criterion_group!(benches, bench_delta, bench_four_term, bench_gl3);
criterion_main!(benches);
