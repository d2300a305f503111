//! Splitting the residual hypergraph into independently solvable games.
//!
//! Hypergraphs are handled as lists of square masks. Connectivity is taken
//! on the bipartite incidence graph (squares on one side, edges on the
//! other); a cut vertex is an articulation point on the square side and a
//! shared edge is an articulation point on the edge side.

use serde::{Deserialize, Serialize};

use crate::board::{bits, ResidualView, Square};
use crate::reductions::GameValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    Components,
    CutVertex,
    SharedEdge,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shared {
    Vertex(Square),
    /// Edge id in the originating ruleset.
    Edge(usize),
}

/// One side of a split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Part {
    pub squares: u64,
    /// Edges wholly inside the part (for a cut vertex these may contain it).
    pub edges: Vec<u64>,
    /// Shared-edge split only: the bridging edge restricted to this part.
    pub bridge: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitPlan {
    pub kind: SplitKind,
    pub parts: Vec<Part>,
    pub shared: Option<Shared>,
    /// Index of the cut vertex, when `kind` is `CutVertex`.
    pub cut_index: Option<usize>,
}

impl SplitPlan {
    fn none() -> Self {
        SplitPlan { kind: SplitKind::None, parts: Vec::new(), shared: None, cut_index: None }
    }
}

/// A game on a sub-hypergraph, always posed with maker to move.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubGame {
    pub squares: u64,
    pub edges: Vec<u64>,
}

impl SubGame {
    /// Canonical cache key: sorted, deduplicated edge masks.
    pub fn key(&self) -> Vec<u64> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e.dedup();
        e
    }
}

impl SplitPlan {
    /// Component games, smallest first.
    pub fn component_games(&self) -> Vec<SubGame> {
        let mut games: Vec<SubGame> =
            self.parts.iter().map(|p| SubGame { squares: p.squares, edges: p.edges.clone() }).collect();
        games.sort_by_key(|g| (g.squares.count_ones(), g.squares.trailing_zeros()));
        games
    }

    /// `[part1, part2, part1 with v maker-marked, part2 with v maker-marked]`.
    pub fn cut_vertex_games(&self) -> Option<[SubGame; 4]> {
        let v = 1u64 << self.cut_index?;
        let plain = |p: &Part| SubGame { squares: p.squares, edges: p.edges.clone() };
        let marked = |p: &Part| SubGame {
            squares: p.squares & !v,
            edges: p.edges.iter().map(|&e| e & !v).collect(),
        };
        let (a, b) = (&self.parts[0], &self.parts[1]);
        Some([plain(a), plain(b), marked(a), marked(b)])
    }

    /// `[part1 without bridge, part2 without bridge, part1 with, part2 with]`.
    pub fn shared_edge_games(&self) -> Option<[SubGame; 4]> {
        if self.kind != SplitKind::SharedEdge {
            return None;
        }
        let without = |p: &Part| SubGame { squares: p.squares, edges: p.edges.clone() };
        let with = |p: &Part| {
            let mut edges = p.edges.clone();
            edges.extend(p.bridge);
            SubGame { squares: p.squares, edges }
        };
        let (a, b) = (&self.parts[0], &self.parts[1]);
        Some([without(a), without(b), with(a), with(b)])
    }
}

/// A hypergraph as `(edge id, mask)` pairs; squares outside every edge are
/// not part of it.
#[derive(Clone, Debug)]
pub(crate) struct Hypergraph {
    pub edges: Vec<(usize, u64)>,
}

impl Hypergraph {
    pub fn from_residual(r: &ResidualView) -> Self {
        Hypergraph { edges: r.edges.iter().map(|e| (e.id, e.mask)).collect() }
    }

    pub fn squares(&self) -> u64 {
        self.edges.iter().fold(0, |m, &(_, e)| m | e)
    }
}

/// Square-side connected components, ignoring edges for which `skip` holds
/// and the squares in `removed`.
fn components_of(edges: &[(usize, u64)], squares: u64, removed: u64, skip: Option<usize>) -> Vec<u64> {
    let mut remaining = squares & !removed;
    let mut comps = Vec::new();
    while remaining != 0 {
        let mut comp = remaining & remaining.wrapping_neg();
        loop {
            let mut grown = comp;
            for (i, &(_, e)) in edges.iter().enumerate() {
                if Some(i) != skip && e & grown != 0 {
                    grown |= e & !removed;
                }
            }
            if grown == comp {
                break;
            }
            comp = grown;
        }
        comps.push(comp);
        remaining &= !comp;
    }
    comps
}

/// Splits into connected components; `kind = None` when connected.
pub fn connected_components(residual: &ResidualView) -> SplitPlan {
    components_plan(&Hypergraph::from_residual(residual))
}

pub(crate) fn components_plan(h: &Hypergraph) -> SplitPlan {
    let comps = components_of(&h.edges, h.squares(), 0, None);
    if comps.len() == 1 {
        return SplitPlan::none();
    }
    let parts = comps
        .into_iter()
        .map(|c| Part {
            squares: c,
            edges: h.edges.iter().filter(|&&(_, e)| e & c != 0).map(|&(_, e)| e).collect(),
            bridge: None,
        })
        .collect();
    SplitPlan { kind: SplitKind::Components, parts, shared: None, cut_index: None }
}

/// Articulation points of the incidence graph, split into square indices
/// and edge positions. Iterative Tarjan from the lowest square.
fn articulation_points(h: &Hypergraph) -> (u64, Vec<usize>) {
    let squares: Vec<usize> = bits(h.squares()).collect();
    let s = squares.len();
    if s == 0 {
        return (0, Vec::new());
    }
    let mut slot = [usize::MAX; 64];
    for (i, &sq) in squares.iter().enumerate() {
        slot[sq] = i;
    }
    let total = s + h.edges.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (j, &(_, e)) in h.edges.iter().enumerate() {
        for sq in bits(e) {
            adj[slot[sq]].push(s + j);
            adj[s + j].push(slot[sq]);
        }
    }
    let mut disc = vec![usize::MAX; total];
    let mut low = vec![0; total];
    let mut is_cut = vec![false; total];
    let mut time = 0;
    let root = 0;
    let mut root_children = 0;
    // (node, parent, next neighbour index)
    let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
    disc[root] = time;
    low[root] = time;
    time += 1;
    while let Some(&mut (u, parent, ref mut next)) = stack.last_mut() {
        if *next < adj[u].len() {
            let w = adj[u][*next];
            *next += 1;
            if disc[w] == usize::MAX {
                disc[w] = time;
                low[w] = time;
                time += 1;
                if u == root {
                    root_children += 1;
                }
                stack.push((w, u, 0));
            } else if w != parent {
                low[u] = low[u].min(disc[w]);
            }
        } else {
            stack.pop();
            if parent != usize::MAX {
                low[parent] = low[parent].min(low[u]);
                if parent != root && low[u] >= disc[parent] {
                    is_cut[parent] = true;
                }
            }
        }
    }
    is_cut[root] = root_children > 1;
    let cut_squares =
        (0..s).filter(|&i| is_cut[i]).fold(0u64, |m, i| m | 1 << squares[i]);
    let cut_edges = (0..h.edges.len()).filter(|&j| is_cut[s + j]).collect();
    (cut_squares, cut_edges)
}

/// Smallest square whose removal disconnects a connected residual into two
/// non-trivial sides (each with at least two squares besides the cut).
pub fn find_cut_vertex(residual: &ResidualView) -> SplitPlan {
    let h = Hypergraph::from_residual(residual);
    cut_vertex_plan(&h, &|i| residual_square(residual, i))
}

fn residual_square(residual: &ResidualView, idx: usize) -> Square {
    let pos = bits(residual.square_mask).position(|i| i == idx).expect("square in residual");
    residual.squares[pos]
}

pub(crate) fn cut_vertex_plan(h: &Hypergraph, square_of: &dyn Fn(usize) -> Square) -> SplitPlan {
    let all = h.squares();
    let (cuts, _) = articulation_points(h);
    for v in bits(cuts) {
        let vbit = 1u64 << v;
        let comps = components_of(&h.edges, all, vbit, None);
        if comps.len() < 2 {
            continue;
        }
        let side1 = comps[0];
        let side2 = all & !vbit & !side1;
        if side1.count_ones() < 2 || side2.count_ones() < 2 {
            continue;
        }
        let (mut e1, mut e2) = (Vec::new(), Vec::new());
        for &(_, e) in &h.edges {
            if e & side2 != 0 {
                e2.push(e);
            } else {
                e1.push(e);
            }
        }
        return SplitPlan {
            kind: SplitKind::CutVertex,
            parts: vec![
                Part { squares: side1 | vbit, edges: e1, bridge: None },
                Part { squares: side2 | vbit, edges: e2, bridge: None },
            ],
            shared: Some(Shared::Vertex(square_of(v))),
            cut_index: Some(v),
        };
    }
    SplitPlan::none()
}

/// An edge whose removal splits the squares into two sides that each keep
/// at least one edge of their own.
pub fn find_shared_edge_split(residual: &ResidualView) -> SplitPlan {
    shared_edge_plan(&Hypergraph::from_residual(residual))
}

pub(crate) fn shared_edge_plan(h: &Hypergraph) -> SplitPlan {
    let all = h.squares();
    let (_, cut_edges) = articulation_points(h);
    for j in cut_edges {
        let comps = components_of(&h.edges, all, 0, Some(j));
        if comps.len() < 2 {
            continue;
        }
        let side1 = comps[0];
        let side2 = all & !side1;
        let (id, bridge) = h.edges[j];
        let mut e1 = Vec::new();
        let mut e2 = Vec::new();
        for (i, &(_, e)) in h.edges.iter().enumerate() {
            if i == j {
                continue;
            }
            if e & side1 != 0 {
                e1.push(e);
            } else {
                e2.push(e);
            }
        }
        if e1.is_empty() || e2.is_empty() || side1.count_ones() < 2 || side2.count_ones() < 2 {
            continue;
        }
        return SplitPlan {
            kind: SplitKind::SharedEdge,
            parts: vec![
                Part { squares: side1, edges: e1, bridge: Some(bridge & side1) },
                Part { squares: side2, edges: e2, bridge: Some(bridge & side2) },
            ],
            shared: Some(Shared::Edge(id)),
            cut_index: None,
        };
    }
    SplitPlan::none()
}

/// Components first, then a cut vertex, then a shared edge.
pub(crate) fn plan_split(h: &Hypergraph, square_of: &dyn Fn(usize) -> Square) -> SplitPlan {
    if h.edges.is_empty() {
        return SplitPlan::none();
    }
    let plan = components_plan(h);
    if plan.kind != SplitKind::None {
        return plan;
    }
    let plan = cut_vertex_plan(h, square_of);
    if plan.kind != SplitKind::None {
        return plan;
    }
    shared_edge_plan(h)
}

/// Maker, moving first, wins a disjoint union iff it wins some component.
pub fn combine_components(values: &[GameValue]) -> GameValue {
    if values.contains(&GameValue::MakerWin) {
        GameValue::MakerWin
    } else {
        GameValue::BreakerWin
    }
}

/// Two parts meeting in one square `v`: maker wins iff it wins a part
/// outright, or wins both parts when `v` is already maker's and maker still
/// has the move.
pub fn combine_cut_vertex(
    win1: GameValue,
    win2: GameValue,
    win1_with_v_and_move: GameValue,
    win2_with_v_and_move: GameValue,
) -> GameValue {
    use GameValue::MakerWin;
    if win1 == MakerWin
        || win2 == MakerWin
        || (win1_with_v_and_move == MakerWin && win2_with_v_and_move == MakerWin)
    {
        MakerWin
    } else {
        GameValue::BreakerWin
    }
}

/// Two disjoint parts joined by one edge `e`: maker wins if it wins a part
/// without its piece of `e`; breaker wins if it wins one part with its piece
/// and the other without. Maker winning both parts with their pieces decides
/// nothing (each win may need its own piece of `e`), so that case is `None`.
pub fn combine_shared_edge(
    win1_prime: GameValue,
    win2_prime: GameValue,
    win1_full: GameValue,
    win2_full: GameValue,
) -> Option<GameValue> {
    use GameValue::{BreakerWin, MakerWin};
    if win1_prime == MakerWin || win2_prime == MakerWin {
        Some(MakerWin)
    } else if win1_full == BreakerWin || win2_full == BreakerWin {
        Some(BreakerWin)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::board::{Position, Ruleset};
    use GameValue::{BreakerWin as B, MakerWin as M};

    fn residual(cols: usize, edges: &[&[usize]]) -> ResidualView {
        let masks: Vec<u64> = edges.iter().map(|e| e.iter().fold(0, |m, &i| m | 1 << i)).collect();
        let all = masks.iter().fold(0, |m, e| m | e);
        let rules = Ruleset::from_masks("t", 1, cols, all, masks).unwrap();
        Position::new(Arc::new(rules)).residual()
    }

    #[test]
    fn components() {
        let r = residual(4, &[&[0, 1], &[2, 3]]);
        let p = connected_components(&r);
        assert_eq!(p.kind, SplitKind::Components);
        assert_eq!(p.parts.len(), 2);
        let r = residual(3, &[&[0, 1], &[1, 2]]);
        assert_eq!(connected_components(&r).kind, SplitKind::None);
        let empty = ResidualView { squares: vec![], square_mask: 0, edges: vec![], incidence: vec![] };
        let p = connected_components(&empty);
        assert!(p.parts.is_empty());
    }

    #[test]
    fn cut_vertex_of_two_triangles() {
        // {0,1,2} and {2,3,4} share square 2
        let r = residual(5, &[&[0, 1, 2], &[2, 3, 4]]);
        let p = find_cut_vertex(&r);
        assert_eq!(p.kind, SplitKind::CutVertex);
        assert_eq!(p.shared, Some(Shared::Vertex(Square::new(1, 3))));
        assert_eq!(p.parts[0].squares & p.parts[1].squares, 1 << 2);
    }

    #[test]
    fn single_edge_has_no_cut() {
        let r = residual(3, &[&[0, 1, 2]]);
        assert_eq!(find_cut_vertex(&r).kind, SplitKind::None);
        assert_eq!(find_shared_edge_split(&r).kind, SplitKind::None);
    }

    #[test]
    fn cycle_is_two_connected() {
        let r = residual(6, &[&[0, 1], &[1, 2], &[2, 3], &[3, 4], &[4, 5], &[5, 0]]);
        assert_eq!(find_cut_vertex(&r).kind, SplitKind::None);
        assert_eq!(find_shared_edge_split(&r).kind, SplitKind::None);
    }

    #[test]
    fn shared_edge_between_clusters() {
        // two triangles of pairs joined by {1,2,3,4}
        let r = residual(
            6,
            &[&[0, 1], &[1, 2], &[2, 0], &[1, 2, 3, 4], &[3, 4], &[4, 5], &[5, 3]],
        );
        assert_eq!(find_cut_vertex(&r).kind, SplitKind::None);
        let p = find_shared_edge_split(&r);
        assert_eq!(p.kind, SplitKind::SharedEdge);
        assert_eq!(p.parts[0].squares, 0b000111);
        assert_eq!(p.parts[0].bridge, Some(0b000110));
        assert_eq!(p.parts[1].bridge, Some(0b011000));
        let games = p.shared_edge_games().unwrap();
        assert_eq!(games[2].edges.len(), games[0].edges.len() + 1);
    }

    #[test]
    fn combination_rules() {
        assert_eq!(combine_cut_vertex(M, B, B, B), M);
        assert_eq!(combine_cut_vertex(B, B, M, B), B);
        assert_eq!(combine_cut_vertex(B, B, M, M), M);
        assert_eq!(combine_shared_edge(M, B, B, B), Some(M));
        assert_eq!(combine_shared_edge(B, B, M, B), Some(B));
        assert_eq!(combine_shared_edge(B, B, M, M), None);
        assert_eq!(combine_components(&[B, M]), M);
        assert_eq!(combine_components(&[B, B]), B);
    }
}
