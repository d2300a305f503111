//! Independent reference: exhaustive minimax over the raw rules, plus
//! random position generators.

#![allow(dead_code)]

use std::sync::Arc;

use linebreaker::{GameValue, Position, Ruleset, Side, Square};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rustc_hash::FxHashMap;

/// Game value by full search: maker wins by owning every square of some
/// edge, breaker wins once that is impossible.
pub struct Oracle {
    edges: Vec<u64>,
    squares: u64,
    memo: FxHashMap<(u64, u64, bool), bool>,
}

impl Oracle {
    pub fn new(rules: &Ruleset) -> Self {
        Oracle { edges: rules.edge_masks().to_vec(), squares: rules.vertex_mask(), memo: FxHashMap::default() }
    }

    pub fn value(&mut self, pos: &Position) -> GameValue {
        if self.maker_wins(pos.maker_mask(), pos.breaker_mask(), pos.to_move() == Side::Maker) {
            GameValue::MakerWin
        } else {
            GameValue::BreakerWin
        }
    }

    fn maker_wins(&mut self, maker: u64, breaker: u64, maker_turn: bool) -> bool {
        if self.edges.iter().any(|&e| e & maker == e) {
            return true;
        }
        let live: Vec<u64> = self.edges.iter().copied().filter(|&e| e & breaker == 0).collect();
        if live.is_empty() {
            return false;
        }
        let empty = self.squares & !maker & !breaker;
        if empty == 0 {
            return false;
        }
        if let Some(&v) = self.memo.get(&(maker, breaker, maker_turn)) {
            return v;
        }
        let mut moves = empty;
        let mut result = !maker_turn;
        while moves != 0 {
            let b = moves & moves.wrapping_neg();
            moves &= moves - 1;
            let v = if maker_turn {
                self.maker_wins(maker | b, breaker, false)
            } else {
                self.maker_wins(maker, breaker | b, true)
            };
            if v == maker_turn {
                result = maker_turn;
                break;
            }
        }
        self.memo.insert((maker, breaker, maker_turn), result);
        result
    }
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A random small ruleset: an m,n,k board, a truncated strip, or a random
/// hypergraph, with at most `max_squares` squares.
pub fn random_ruleset(rng: &mut StdRng, max_squares: usize) -> Ruleset {
    loop {
        let kind = rng.gen_range(0..3);
        let r = match kind {
            0 => {
                let rows = rng.gen_range(1..=4);
                let cols = rng.gen_range(2..=(max_squares / rows).clamp(2, 6));
                let k = rng.gen_range(2..=rows.max(cols).min(4));
                linebreaker::generate_mnk(rows, cols, k)
            }
            1 => {
                let n = rng.gen_range(7..=(max_squares / 4).max(7));
                if 4 * n > max_squares {
                    continue;
                }
                linebreaker::generate_trunc7(n)
            }
            _ => {
                let rows = rng.gen_range(2..=4);
                let cols = rng.gen_range(3..=(max_squares / rows).clamp(3, 5));
                let total = rows * cols;
                let count = rng.gen_range(2..=10);
                let mut edges: Vec<Vec<Square>> = Vec::new();
                for _ in 0..count {
                    let size = rng.gen_range(2..=4.min(total));
                    let mut idx: Vec<usize> = (0..total).collect();
                    idx.shuffle(rng);
                    let mut e: Vec<Square> = idx[..size]
                        .iter()
                        .map(|&i| Square::new((i / cols + 1) as u8, (i % cols + 1) as u8))
                        .collect();
                    e.sort();
                    if !edges.contains(&e) {
                        edges.push(e);
                    }
                }
                Ruleset::new("random", rows, cols, 4, edges).and_then(covered)
            }
        };
        match r {
            Ok(r) if r.square_count() <= max_squares && !r.edges().is_empty() => return r,
            _ => continue,
        }
    }
}

/// Two random clusters of short edges joined either through a single
/// shared square or through one edge spanning both, so that cut-vertex
/// and shared-edge splits occur.
pub fn split_ruleset(rng: &mut StdRng, max_squares: usize) -> Ruleset {
    let rows = rng.gen_range(2..=4);
    let cols = (max_squares / rows).min(6);
    let total = rows * cols;
    let sq = |i: usize| Square::new((i / cols + 1) as u8, (i % cols + 1) as u8);
    let mut idx: Vec<usize> = (0..total).collect();
    idx.shuffle(rng);
    let cut = rng.gen_range(3..=total - 3);
    let (a, b) = idx.split_at(cut);
    let mut edges: Vec<Vec<Square>> = Vec::new();
    let mut cluster = |part: &[usize], extra: Option<usize>, rng: &mut StdRng| {
        let mut pool: Vec<usize> = part.to_vec();
        pool.extend(extra);
        for _ in 0..rng.gen_range(2..=5) {
            let size = rng.gen_range(2..=3.min(pool.len()));
            let mut e: Vec<Square> = pool.choose_multiple(rng, size).map(|&i| sq(i)).collect();
            if let Some(v) = extra.filter(|_| rng.gen_bool(0.5)) {
                if !e.contains(&sq(v)) {
                    e[0] = sq(v);
                }
            }
            e.sort();
            e.dedup();
            if e.len() >= 2 && !edges.contains(&e) {
                edges.push(e);
            }
        }
    };
    cluster(a, None, rng);
    if rng.gen_bool(0.5) {
        let v = a[rng.gen_range(0..a.len())];
        cluster(b, Some(v), rng);
    } else {
        cluster(b, None, rng);
        let mut e: Vec<Square> = a.choose_multiple(rng, 2).chain(b.choose_multiple(rng, 2)).map(|&i| sq(i)).collect();
        e.sort();
        edges.push(e);
    }
    Ruleset::new("split", rows, cols, 4, edges).and_then(covered).expect("squares lie on the grid")
}

/// The same hypergraph with squares outside every edge removed.
fn covered(r: Ruleset) -> linebreaker::Result<Ruleset> {
    let used = r.edge_masks().iter().fold(0, |a, m| a | m);
    Ruleset::from_masks(r.name(), r.rows(), r.cols(), used, r.edge_masks().to_vec())
}

/// Random legal position reached by alternating play, with either side to
/// move and no completed maker line.
pub fn random_position(rng: &mut StdRng, rules: Arc<Ruleset>) -> Position {
    random_position_within(rng, rules, usize::MAX)
}

/// As [`random_position`], with at most `max_empty` empty squares unless a
/// completed line cuts the play short.
pub fn random_position_within(rng: &mut StdRng, rules: Arc<Ruleset>, max_empty: usize) -> Position {
    let n = rules.square_count();
    let least = n.saturating_sub(max_empty);
    let moves = rng.gen_range(least..=least.max(n.saturating_sub(2).min(10)));
    let mut order: Vec<usize> = linebreaker::bits(rules.vertex_mask()).collect();
    order.shuffle(rng);
    let mut pos = Position::new(rules);
    for &i in order.iter().take(moves) {
        pos.play(i);
        if pos.has_completed_line() {
            pos.undo(i);
            break;
        }
    }
    if rng.gen_bool(0.3) {
        let side = pos.to_move().opponent();
        pos.set_to_move(side);
    }
    pos
}
