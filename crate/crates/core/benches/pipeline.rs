//! Parallel against sequential evaluation of a generated corpus and of a
//! batch of simulator scripts.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cdgl_core::corpus::{evaluate_seeds, evaluate_seeds_sequential};
use cdgl_core::gen::rng;
use cdgl_core::par::init_pool;
use cdgl_core::sim::{run_batch, run_random, run_system, RandomDemon, Script, SimOptions, State};
use cdgl_core::surface::{parse_formula, parse_game};
use cdgl_core::term::ratio;

fn corpus(c: &mut Criterion) {
    init_pool();
    let mut group = c.benchmark_group("corpus");
    group.sample_size(10);
    for n in [50u64, 200] {
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| b.iter(|| evaluate_seeds(black_box(0..n))));
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| evaluate_seeds_sequential(black_box(0..n)))
        });
    }
    group.finish();
}

fn scripts(c: &mut Criterion) {
    init_pool();
    let g =
        parse_game("{{L:=-1; R:=1; {x'=L+R & x_l <= x & x <= x_r}} ++ {L:=1; R:=-1; {x'=L+R & x_l <= x & x <= x_r}}}*")
            .unwrap();
    let init =
        State::from_pairs([("x", ratio(3, 1)), ("x0", ratio(3, 1)), ("x_l", ratio(0, 1)), ("x_r", ratio(10, 1))]);
    let post = parse_formula("x = x0").unwrap();
    let opts = SimOptions { force_rk4: true, ..SimOptions::default() };
    let batch: Vec<Script> = (0..64)
        .map(|seed| {
            let mut r = rng(seed);
            let mut demon = RandomDemon::new(&mut r);
            run_random(&g, &init, &mut demon, 1000, &post, &opts).unwrap().0
        })
        .collect();
    let mut group = c.benchmark_group("scripts");
    group.sample_size(10);
    group.bench_function("parallel", |b| b.iter(|| run_batch(&g, &init, black_box(&batch), &post, &opts)));
    group.bench_function("sequential", |b| {
        b.iter(|| batch.iter().map(|s| run_system(&g, &init, s, &post, &opts)).collect::<Vec<_>>())
    });
    group.finish();
}

criterion_group!(benches, corpus, scripts);
criterion_main!(benches);
