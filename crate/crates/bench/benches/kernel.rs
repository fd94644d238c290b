use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use deak_bench::{composed_cuts, corpus_calculus};
use deak_core::corpus;
use deak_core::cutelim::{eliminate, lint::lint, DEFAULT_FUEL};
use deak_core::semantics::{valid_bounded, Bounds};
use deak_core::{builtin_deak_legacy, check, parse_formula};
use std::hint::black_box;

fn checking(c: &mut Criterion) {
    let calc = corpus_calculus();
    c.bench_function("corpus/verify_all", |b| b.iter(|| black_box(corpus::verify_all(&calc))));
    let e = corpus::get("C.box-dia").unwrap();
    let proofs = e.proofs().unwrap();
    c.bench_function("check/C.box-dia", |b| {
        b.iter(|| proofs.iter().map(|p| check(black_box(p), &calc).nodes).sum::<usize>())
    });
}

fn linting(c: &mut Criterion) {
    let d = corpus::base_decls();
    let prime = corpus_calculus();
    let legacy = builtin_deak_legacy(&d, true);
    c.bench_function("lint/deak-prime", |b| b.iter(|| black_box(lint(&prime))));
    c.bench_function("lint/deak-legacy", |b| b.iter(|| black_box(lint(&legacy))));
}

fn elimination(c: &mut Criterion) {
    let cuts = composed_cuts();
    let mut g = c.benchmark_group("eliminate");
    for (id, cut, calc) in &cuts {
        g.bench_function(id.as_str(), |b| {
            b.iter_batched(|| cut.clone(), |t| eliminate(&t, calc, DEFAULT_FUEL).unwrap(), BatchSize::SmallInput)
        });
    }
    g.finish();
}

fn model_checking(c: &mut Criterion) {
    let d = deak_core::semantics::announcement_pool(&["p".into(), "q".into()], &[deak_core::Agent::new("a")]);
    let a = parse_formula("<ann_p><a>q", &d).unwrap();
    let b = parse_formula("p & <a>(p & <ann_p>q)", &d).unwrap();
    let bounds = Bounds::default();
    c.bench_function("mc/interaction-instance", |bch| bch.iter(|| valid_bounded(&a, &b, &bounds, &d).unwrap()));
}

criterion_group!(benches, checking, linting, elimination, model_checking);
criterion_main!(benches);
