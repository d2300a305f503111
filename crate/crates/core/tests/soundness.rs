mod common;

use std::sync::Arc;

use common::{random_position, random_ruleset, rng, Oracle};
use linebreaker::{solve, Config, Features, GameValue, Limits, SolveValue};

fn single_flag_configs() -> Vec<(&'static str, Features)> {
    let b = Features::BASELINE;
    vec![
        ("baseline", b),
        ("forced_move", Features { forced_move: true, ..b }),
        ("dead_squares", Features { dead_squares: true, ..b }),
        ("dominated", Features { dominated: true, ..b }),
        ("breaker_stop", Features { breaker_stop: true, ..b }),
        ("components", Features { components: true, ..b }),
        ("isomorphy", Features { isomorphy: true, ..b }),
        ("heuristic_pn", Features { heuristic_pn: true, ..b }),
        ("heuristic_dn", Features { heuristic_dn: true, ..b }),
        ("all", Features::ALL),
        ("all_iso", Features { isomorphy: true, ..Features::ALL }),
    ]
}

#[test]
fn every_configuration_matches_minimax() {
    let mut r = rng(7);
    let configs = single_flag_configs();
    let mut mismatches = Vec::new();
    for _ in 0..400 {
        let rules = Arc::new(random_ruleset(&mut r, 16));
        let mut oracle = Oracle::new(&rules);
        let pos = random_position(&mut r, rules);
        let truth = oracle.value(&pos);
        for (name, f) in &configs {
            let got = solve(&pos, &Config::with_features(*f), Limits::new(Some(std::time::Duration::from_secs(3)), None)).value;
            let want = match truth {
                GameValue::MakerWin => SolveValue::MakerWin,
                GameValue::BreakerWin => SolveValue::BreakerWin,
            };
            if got != want {
                mismatches.push(format!("{name}: want {want:?} got {got:?}\n{}", pos.to_text()));
            }
        }
    }
    assert!(mismatches.is_empty(), "{} mismatches:\n{}", mismatches.len(), mismatches[..mismatches.len().min(5)].join("\n"));
}
