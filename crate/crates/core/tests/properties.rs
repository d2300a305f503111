mod common;

use std::sync::Arc;

use common::{random_position, random_ruleset, rng};
use linebreaker::{
    bits, canonical_key, Config, Features, Limits, Position, Search, Side,
};
use proptest::prelude::*;

fn position(seed: u64, max_squares: usize) -> Position {
    let mut r = rng(seed);
    let rules = Arc::new(random_ruleset(&mut r, max_squares));
    random_position(&mut r, rules)
}

fn on_one_line(pos: &Position, idx: usize) -> bool {
    pos.live_edges().any(|(_, m)| m >> idx & 1 == 1 && (m & pos.empty_mask()).count_ones() == 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn incremental_state_matches_recomputation(seed in any::<u64>(), extra in 0usize..8) {
        let mut pos = position(seed, 40);
        for i in bits(pos.empty_mask()).take(extra).collect::<Vec<_>>() {
            pos.play(i);
            prop_assert_eq!(&pos, &pos.recomputed());
        }
    }

    #[test]
    fn undo_restores_position(seed in any::<u64>()) {
        let pos = position(seed, 40);
        for i in bits(pos.empty_mask()) {
            let mut p = pos.clone();
            p.play(i);
            p.undo(i);
            prop_assert_eq!(&p, &pos);
            prop_assert_eq!(p.potential().to_bits(), pos.potential().to_bits());
        }
    }

    #[test]
    fn potential_moves_by_contribution(seed in any::<u64>()) {
        let pos = position(seed, 40);
        prop_assert!(pos.potential() >= 0.0);
        prop_assert_eq!(pos.potential() == 0.0, pos.live_edge_count() == 0);
        for i in bits(pos.empty_mask()) {
            let cont = pos.contribution_at(i);
            let mut b = pos.clone();
            b.put(i, Side::Breaker);
            prop_assert_eq!(b.potential(), pos.potential() - cont);
            if !on_one_line(&pos, i) {
                let mut m = pos.clone();
                m.put(i, Side::Maker);
                prop_assert_eq!(m.potential(), pos.potential() + cont);
            }
        }
    }

    #[test]
    fn greedy_breaker_never_raises_potential(seed in any::<u64>()) {
        let mut pos = position(seed, 40);
        pos.set_to_move(Side::Breaker);
        let empty: Vec<usize> = bits(pos.empty_mask()).collect();
        prop_assume!(empty.len() >= 2);
        let best = *empty
            .iter()
            .max_by(|&&a, &&b| pos.contribution_at(a).total_cmp(&pos.contribution_at(b)))
            .unwrap();
        let mut after = pos.clone();
        after.play(best);
        for reply in bits(after.empty_mask()) {
            let mut p = after.clone();
            p.play(reply);
            prop_assert!(p.potential() <= pos.potential());
        }
    }

    #[test]
    fn normalization_is_idempotent(seed in any::<u64>()) {
        let pos = position(seed, 40);
        let search = Search::new(Config::with_features(Features::ALL), Limits::NONE);
        let (once, status) = search.normalized(&pos);
        if !status.is_decided() {
            let (twice, again) = search.normalized(&once);
            prop_assert_eq!(&twice, &once);
            prop_assert_eq!(again, status);
        }
    }

    #[test]
    fn mirrored_positions_share_a_key(seed in any::<u64>()) {
        let pos = position(seed, 40);
        if let Ok(m) = pos.mirrored() {
            let config = Config::default();
            prop_assert_eq!(canonical_key(&m, &config), canonical_key(&pos, &config));
            let iso = Config::with_features(Features { isomorphy: true, ..Features::ALL });
            prop_assert_eq!(canonical_key(&m, &iso), canonical_key(&pos, &iso));
        }
    }

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let pos = position(seed, 40);
        let back = Position::parse(pos.rules().clone(), &pos.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), pos.to_text());
        prop_assert_eq!(&back, &pos);
    }
}
