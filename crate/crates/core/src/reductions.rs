//! Terminal detection and move-set restriction applied before a node is
//! expanded.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::board::{bits, Position, Side, Square};
use crate::config::{Features, MoveOrder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameValue {
    MakerWin,
    BreakerWin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalValue {
    MakerWin,
    BreakerWin,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalReason {
    /// Some edge is already fully maker-marked.
    CompletedLine,
    OneLineMakerTurn,
    DoubleThreat,
    CrossingTheorem,
    PotentialStop,
    NoLiveEdges,
    BoardFull,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminalStatus {
    pub value: TerminalValue,
    pub reason: TerminalReason,
}

impl TerminalStatus {
    const UNDECIDED: TerminalStatus =
        TerminalStatus { value: TerminalValue::Undecided, reason: TerminalReason::None };

    fn maker(reason: TerminalReason) -> Self {
        TerminalStatus { value: TerminalValue::MakerWin, reason }
    }

    fn breaker(reason: TerminalReason) -> Self {
        TerminalStatus { value: TerminalValue::BreakerWin, reason }
    }

    pub fn is_decided(&self) -> bool {
        self.value != TerminalValue::Undecided
    }

    pub fn game_value(&self) -> Option<GameValue> {
        match self.value {
            TerminalValue::MakerWin => Some(GameValue::MakerWin),
            TerminalValue::BreakerWin => Some(GameValue::BreakerWin),
            TerminalValue::Undecided => None,
        }
    }
}

/// One pass over the live edges collecting everything the reductions need.
#[derive(Clone, Debug)]
pub(crate) struct LineScan {
    /// Empty squares of live 1-lines.
    pub ones: u64,
    /// Squares on two live 2-lines whose other squares differ.
    pub crossings: u64,
    /// Empty squares of live 2-lines.
    pub twos: u64,
    /// Empty squares in at least one live edge.
    pub support: u64,
    /// Squares paired off: two private squares of the same live edge.
    pub paired: u64,
    /// Edges removed by pairings.
    pub paired_edges: Vec<usize>,
    /// `(maker square, breaker square)` of a 2-line with one private square.
    pub eager: Option<(usize, usize)>,
    pub live: usize,
}

impl LineScan {
    pub fn new(pos: &Position) -> Self {
        let mut ones = 0u64;
        let mut crossings = 0u64;
        let mut twos = 0u64;
        let mut once = 0u64;
        let mut twice = 0u64;
        let mut partner = [u8::MAX; 64];
        let mut live = 0;
        for (_, m) in pos.live_edges() {
            live += 1;
            twice |= once & m;
            once |= m;
            match m.count_ones() {
                1 => ones |= m,
                2 => {
                    twos |= m;
                    let a = m.trailing_zeros() as usize;
                    let b = 63 - m.leading_zeros() as usize;
                    for (x, y) in [(a, b), (b, a)] {
                        if partner[x] == u8::MAX {
                            partner[x] = y as u8;
                        } else if partner[x] as usize != y {
                            crossings |= 1 << x;
                        }
                    }
                }
                _ => {}
            }
        }
        let private = once & !twice;
        let mut paired = 0u64;
        let mut paired_edges = Vec::new();
        let mut eager = None;
        for (id, m) in pos.live_edges() {
            let own = m & private;
            if own.count_ones() >= 2 {
                let s = own.trailing_zeros();
                let rest = own & (own - 1);
                let t = rest.trailing_zeros();
                paired |= (1 << s) | (1 << t);
                paired_edges.push(id);
            } else if eager.is_none() && m.count_ones() == 2 && own.count_ones() == 1 {
                let s = own.trailing_zeros() as usize;
                let other = (m & !own).trailing_zeros() as usize;
                eager = Some((other, s));
            }
        }
        LineScan { ones, crossings, twos, support: once, paired, paired_edges, eager, live }
    }
}

/// Terminal check with every stop rule enabled.
pub fn terminal_status(pos: &Position) -> TerminalStatus {
    terminal_status_with(pos, true)
}

/// Terminal check; the potential stop is only used when `breaker_stop` is set.
pub fn terminal_status_with(pos: &Position, breaker_stop: bool) -> TerminalStatus {
    terminal_from_scan(pos, &LineScan::new(pos), true, breaker_stop)
}

/// `threats` enables the 1-line, crossing and double-threat rules; without
/// it only completed lines, dead boards and the potential stop decide.
pub(crate) fn terminal_from_scan(pos: &Position, scan: &LineScan, threats: bool, breaker_stop: bool) -> TerminalStatus {
    if pos.has_completed_line() {
        return TerminalStatus::maker(TerminalReason::CompletedLine);
    }
    match pos.to_move() {
        _ if !threats => {}
        Side::Maker => {
            if scan.ones != 0 {
                return TerminalStatus::maker(TerminalReason::OneLineMakerTurn);
            }
            if scan.crossings != 0 {
                return TerminalStatus::maker(TerminalReason::CrossingTheorem);
            }
        }
        Side::Breaker => {
            if scan.ones.count_ones() >= 2 {
                return TerminalStatus::maker(TerminalReason::DoubleThreat);
            }
        }
    }
    if breaker_stop && pos.to_move() == Side::Breaker && pos.potential() < 1.0 {
        return TerminalStatus::breaker(TerminalReason::PotentialStop);
    }
    if scan.live == 0 {
        return TerminalStatus::breaker(TerminalReason::NoLiveEdges);
    }
    if pos.empty_mask() == 0 {
        return TerminalStatus::breaker(TerminalReason::BoardFull);
    }
    TerminalStatus::UNDECIDED
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestrictionKind {
    Forced,
    Open,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveRestriction {
    pub kind: RestrictionKind,
    pub candidate_squares: Vec<Square>,
    pub eliminated_squares: BTreeSet<Square>,
    pub eliminated_edges: BTreeSet<usize>,
    pub eager_pair: Option<(Square, Square)>,
}

impl MoveRestriction {
    fn open(pos: &Position, candidates: u64) -> Self {
        MoveRestriction {
            kind: RestrictionKind::Open,
            candidate_squares: pos.rules().squares_of(candidates),
            eliminated_squares: BTreeSet::new(),
            eliminated_edges: BTreeSet::new(),
            eager_pair: None,
        }
    }
}

/// Squares breaker must choose from, if any: the empty square of a 1-line,
/// otherwise the 2-line squares whose marking leaves no crossing (any other
/// reply hands maker a crossing).
pub(crate) fn forced_mask(pos: &Position, scan: &LineScan) -> Option<u64> {
    if pos.to_move() != Side::Breaker {
        return None;
    }
    if scan.ones != 0 {
        return Some(scan.ones);
    }
    if scan.crossings == 0 {
        return None;
    }
    let mut keep = 0u64;
    let mut p = pos.clone();
    for s in bits(scan.twos) {
        p.play(s);
        if LineScan::new(&p).crossings == 0 {
            keep |= 1 << s;
        }
        p.undo(s);
    }
    Some(if keep != 0 { keep } else { scan.crossings })
}

pub fn forced_moves(pos: &Position) -> MoveRestriction {
    let scan = LineScan::new(pos);
    match forced_mask(pos, &scan) {
        Some(m) => MoveRestriction {
            kind: RestrictionKind::Forced,
            ..MoveRestriction::open(pos, m)
        },
        None => MoveRestriction::open(pos, scan.support),
    }
}

/// Empty squares outside every live edge.
pub fn prune_dead_squares(pos: &Position) -> MoveRestriction {
    let scan = LineScan::new(pos);
    let dead = pos.empty_mask() & !scan.support;
    MoveRestriction {
        eliminated_squares: pos.rules().squares_of(dead).into_iter().collect(),
        ..MoveRestriction::open(pos, scan.support)
    }
}

/// Partial pairings (two squares private to one edge remove the edge and
/// both squares) and the eager 2-line exchange.
pub fn dominated_square_reduction(pos: &Position) -> MoveRestriction {
    let scan = LineScan::new(pos);
    let rules = pos.rules();
    MoveRestriction {
        eliminated_squares: rules.squares_of(scan.paired).into_iter().collect(),
        eliminated_edges: scan.paired_edges.iter().copied().collect(),
        eager_pair: scan.eager.map(|(m, b)| (rules.square(m), rules.square(b))),
        ..MoveRestriction::open(pos, pos.empty_mask() & !scan.paired)
    }
}

/// Candidate moves as a mask, before ordering.
pub(crate) fn candidate_mask(pos: &Position, scan: &LineScan, features: &Features) -> u64 {
    if features.forced_move {
        if let Some(m) = forced_mask(pos, scan) {
            return m;
        }
    }
    let mut m = pos.empty_mask();
    if features.dead_squares {
        m &= scan.support;
    }
    if features.dominated {
        m &= !scan.paired;
    }
    m
}

pub(crate) fn order_moves(pos: &Position, mask: u64, order: MoveOrder) -> Vec<usize> {
    let mut moves: Vec<usize> = bits(mask).collect();
    if order == MoveOrder::Contribution {
        let mut keyed: Vec<(f64, usize)> = moves.iter().map(|&i| (pos.contribution_at(i), i)).collect();
        keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        moves = keyed.into_iter().map(|(_, i)| i).collect();
    }
    moves
}

/// Moves to branch on at an undecided position.
pub fn legal_moves(pos: &Position, features: &Features, order: MoveOrder) -> Vec<Square> {
    let scan = LineScan::new(pos);
    let mask = candidate_mask(pos, &scan, features);
    order_moves(pos, mask, order).into_iter().map(|i| pos.rules().square(i)).collect()
}

/// Applies value-preserving simplifications in place until none applies:
/// pairings are removed, a single forced breaker reply is played, and at
/// maker's turn the eager 2-line exchange is played. Returns the terminal
/// status of the result.
pub(crate) fn normalize(pos: &mut Position, features: &Features) -> (TerminalStatus, LineScan) {
    loop {
        let scan = LineScan::new(pos);
        let status = terminal_from_scan(pos, &scan, features.forced_move, features.breaker_stop);
        if status.is_decided() {
            return (status, scan);
        }
        if features.dominated && scan.paired != 0 {
            for i in bits(scan.paired) {
                pos.put(i, Side::Breaker);
            }
            continue;
        }
        if features.forced_move {
            if let Some(m) = forced_mask(pos, &scan) {
                if m.count_ones() == 1 {
                    pos.play(m.trailing_zeros() as usize);
                    continue;
                }
            }
        }
        if features.dominated && pos.to_move() == Side::Maker {
            if let Some((maker_sq, breaker_sq)) = scan.eager {
                pos.play(maker_sq);
                pos.play(breaker_sq);
                continue;
            }
        }
        return (status, scan);
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::board::Ruleset;
    use crate::rulesets::generate_mnk;

    fn s(r: u8, c: u8) -> Square {
        Square::new(r, c)
    }

    fn line(cells: &[(u8, u8)]) -> Vec<Square> {
        cells.iter().map(|&(r, c)| s(r, c)).collect()
    }

    fn pos(rules: Ruleset, maker: &[(u8, u8)], breaker: &[(u8, u8)], side: Side) -> Position {
        let rules = Arc::new(rules);
        let mut p = Position::new(rules.clone());
        for &(r, c) in maker {
            p.put(rules.index(s(r, c)).unwrap(), Side::Maker);
        }
        for &(r, c) in breaker {
            p.put(rules.index(s(r, c)).unwrap(), Side::Breaker);
        }
        p.set_to_move(side);
        p
    }

    #[test]
    fn one_line_at_maker_turn_wins() {
        let r = Ruleset::new("t", 1, 3, 3, vec![line(&[(1, 1), (1, 2), (1, 3)])]).unwrap();
        let p = pos(r, &[(1, 1), (1, 2)], &[], Side::Maker);
        let st = terminal_status(&p);
        assert_eq!(st.value, TerminalValue::MakerWin);
        assert_eq!(st.reason, TerminalReason::OneLineMakerTurn);
    }

    #[test]
    fn single_seven_line_breaker_to_move() {
        let p = pos(generate_mnk(1, 7, 7).unwrap(), &[], &[], Side::Breaker);
        let st = terminal_status(&p);
        assert_eq!((st.value, st.reason), (TerminalValue::BreakerWin, TerminalReason::PotentialStop));
        assert_eq!(terminal_status_with(&p, false).value, TerminalValue::Undecided);
    }

    #[test]
    fn one_one_line_breaker_to_move_is_forced() {
        // a 1-line plus enough potential to stay undecided
        let r = Ruleset::new(
            "t",
            2,
            3,
            3,
            vec![line(&[(1, 1), (1, 2), (1, 3)]), line(&[(2, 1), (2, 2)]), line(&[(2, 2), (2, 3)])],
        )
        .unwrap();
        let p = pos(r, &[(1, 1), (1, 2)], &[], Side::Breaker);
        assert_eq!(terminal_status(&p).value, TerminalValue::Undecided);
        let f = forced_moves(&p);
        assert_eq!(f.kind, RestrictionKind::Forced);
        assert_eq!(f.candidate_squares, vec![s(1, 3)]);
    }

    #[test]
    fn double_threat_at_breaker_turn() {
        let r = Ruleset::new("t", 2, 2, 2, vec![line(&[(1, 1), (1, 2)]), line(&[(2, 1), (2, 2)])]).unwrap();
        let p = pos(r, &[(1, 1), (2, 1)], &[], Side::Breaker);
        assert_eq!(terminal_status(&p).reason, TerminalReason::DoubleThreat);
    }

    #[test]
    fn crossing_needs_distinct_partners() {
        // {a,b} twice (as restricted sets) is not a crossing
        let r = Ruleset::new(
            "t",
            1,
            4,
            4,
            vec![line(&[(1, 1), (1, 2), (1, 3)]), line(&[(1, 2), (1, 3), (1, 4)])],
        )
        .unwrap();
        let p = pos(r, &[(1, 1), (1, 4)], &[], Side::Maker);
        assert_eq!(terminal_status(&p).value, TerminalValue::Undecided);

        let r = Ruleset::new("t", 1, 3, 2, vec![line(&[(1, 1), (1, 2)]), line(&[(1, 2), (1, 3)])]).unwrap();
        let p = pos(r.clone(), &[], &[], Side::Maker);
        assert_eq!(terminal_status(&p).reason, TerminalReason::CrossingTheorem);
        let p = pos(r, &[], &[], Side::Breaker);
        let f = forced_moves(&p);
        // a partner square breaks the crossing as well
        assert_eq!(f.kind, RestrictionKind::Forced);
        assert_eq!(f.candidate_squares, vec![s(1, 1), s(1, 2), s(1, 3)]);
        let three = vec![line(&[(1, 2), (1, 1)]), line(&[(1, 2), (1, 3)]), line(&[(1, 2), (2, 2)])];
        let p = pos(Ruleset::new("t", 2, 3, 2, three).unwrap(), &[], &[], Side::Breaker);
        assert_eq!(forced_moves(&p).candidate_squares, vec![s(1, 2)]);
    }

    #[test]
    fn open_position_lists_live_squares() {
        let p = Position::new(Arc::new(generate_mnk(4, 7, 7).unwrap()));
        let f = forced_moves(&p);
        assert_eq!(f.kind, RestrictionKind::Open);
        assert_eq!(f.candidate_squares.len(), 28);
        assert_eq!(legal_moves(&p, &Features::BASELINE, MoveOrder::RowMajor).len(), 28);
        // two private squares of every row are paired off
        assert_eq!(legal_moves(&p, &Features::ALL, MoveOrder::RowMajor).len(), 20);
    }

    #[test]
    fn dead_squares() {
        let p = Position::new(Arc::new(generate_mnk(4, 7, 7).unwrap()));
        assert!(prune_dead_squares(&p).eliminated_squares.is_empty());
        let r = Ruleset::new("t", 1, 4, 2, vec![line(&[(1, 1), (1, 2)]), line(&[(1, 3), (1, 4)])]).unwrap();
        let p = pos(r, &[], &[(1, 3)], Side::Maker);
        let d = prune_dead_squares(&p);
        assert_eq!(d.eliminated_squares.into_iter().collect::<Vec<_>>(), vec![s(1, 4)]);
        assert_eq!(d.candidate_squares, vec![s(1, 1), s(1, 2)]);
    }

    #[test]
    fn pairing_and_eager_pair() {
        // edge {1,2,3} where 1 and 2 are private; 3 also in {3,4,5}
        let r = Ruleset::new(
            "t",
            1,
            5,
            3,
            vec![line(&[(1, 1), (1, 2), (1, 3)]), line(&[(1, 3), (1, 4), (1, 5)])],
        )
        .unwrap();
        let p = pos(r, &[], &[], Side::Maker);
        let d = dominated_square_reduction(&p);
        assert!(d.eliminated_edges.contains(&0));
        assert!(d.eliminated_squares.contains(&s(1, 1)) && d.eliminated_squares.contains(&s(1, 2)));

        // 2-line {1,2} with 1 private, 2 also in {2,3,4}
        let r = Ruleset::new(
            "t",
            1,
            4,
            3,
            vec![line(&[(1, 1), (1, 2)]), line(&[(1, 2), (1, 3), (1, 4)])],
        )
        .unwrap();
        let p = pos(r, &[], &[], Side::Maker);
        let d = dominated_square_reduction(&p);
        assert_eq!(d.eager_pair, Some((s(1, 2), s(1, 1))));
        assert!(d.eliminated_squares.is_empty() || !d.eliminated_squares.contains(&s(1, 2)));

        let p = Position::new(Arc::new(generate_mnk(3, 3, 3).unwrap()));
        let d = dominated_square_reduction(&p);
        assert!(d.eliminated_squares.is_empty() && d.eager_pair.is_none());
    }

    #[test]
    fn contribution_ordering_puts_best_first() {
        let p = Position::new(Arc::new(generate_mnk(3, 3, 3).unwrap()));
        let moves = legal_moves(&p, &Features::BASELINE, MoveOrder::Contribution);
        assert_eq!(moves[0], s(2, 2));
        let best = moves.iter().map(|&m| p.square_contribution(m).unwrap()).fold(0.0, f64::max);
        assert_eq!(p.square_contribution(moves[0]).unwrap(), best);
    }

    #[test]
    fn normalize_is_idempotent() {
        let r = Ruleset::new(
            "t",
            2,
            4,
            3,
            vec![
                line(&[(1, 1), (1, 2)]),
                line(&[(1, 2), (1, 3), (1, 4)]),
                line(&[(2, 1), (2, 2), (2, 3)]),
                line(&[(1, 4), (2, 4), (2, 3)]),
            ],
        )
        .unwrap();
        let mut p = pos(r, &[], &[], Side::Maker);
        normalize(&mut p, &Features::ALL);
        let once = p.clone();
        normalize(&mut p, &Features::ALL);
        assert_eq!(p, once);
    }
}
