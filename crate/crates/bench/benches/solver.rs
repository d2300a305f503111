use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use linebreaker::{
    bits, canonical_key, generate_trunc7, solve, Config, Features, Limits, Position,
};

fn midgame(n: usize) -> Position {
    let rules = Arc::new(generate_trunc7(n).unwrap());
    let mut pos = Position::new(rules);
    for i in [0, 2 * n + 3, n + 1, 3 * n - 2, 2, n + 5] {
        pos.play(i);
    }
    pos
}

fn moves(c: &mut Criterion) {
    let pos = midgame(10);
    c.bench_function("play_undo_all_squares", |b| {
        b.iter(|| {
            let mut p = pos.clone();
            for i in bits(p.empty_mask()) {
                p.play(i);
                black_box(p.potential());
                p.undo(i);
            }
            p
        })
    });
    let config = Config::default();
    c.bench_function("canonical_key", |b| b.iter(|| canonical_key(black_box(&pos), &config)));
    let iso = Config::with_features(Features { isomorphy: true, ..Features::ALL });
    c.bench_function("canonical_key_isomorphy", |b| b.iter(|| canonical_key(black_box(&pos), &iso)));
}

fn solves(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_trunc7");
    g.sample_size(10);
    for n in [7, 8] {
        let root = Position::new(Arc::new(generate_trunc7(n).unwrap()));
        g.bench_with_input(BenchmarkId::new("all", n), &root, |b, root| {
            b.iter(|| solve(root, &Config::default(), Limits::NONE))
        });
    }
    let root = Position::new(Arc::new(generate_trunc7(7).unwrap()));
    g.bench_function("forced_move_only/7", |b| {
        let c = Config::with_features(Features { forced_move: true, ..Features::BASELINE });
        b.iter(|| solve(&root, &c, Limits::NONE))
    });
    g.finish();
}

criterion_group!(benches, moves, solves);
criterion_main!(benches);
