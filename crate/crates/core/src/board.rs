//! Hypergraph boards and positions.
//!
//! A [`Ruleset`] is a rectangular grid of at most 64 squares together with a
//! list of hyperedges. Squares are addressed by 1-based `(row, col)` and
//! internally by a dense row-major index, so every set of squares fits in a
//! `u64` mask. A [`Position`] keeps the marks of both players plus the
//! per-edge l-line bookkeeping, updated incrementally on every move.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

pub const MAX_SQUARES: usize = 64;

/// Marker stored in [`Position`] edge slots for edges holding a breaker mark.
const DEAD: u8 = u8::MAX;

/// A board square, 1-based. Ordered row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Square {
    pub row: u8,
    pub col: u8,
}

impl Square {
    pub const fn new(row: u8, col: u8) -> Self {
        Square { row, col }
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Maker,
    Breaker,
}

impl Side {
    pub fn opponent(self) -> Side {
        match self {
            Side::Maker => Side::Breaker,
            Side::Breaker => Side::Maker,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mark {
    Empty,
    Maker,
    Breaker,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperedge {
    pub id: usize,
    /// Sorted row-major.
    pub squares: Vec<Square>,
}

/// Status of one hyperedge in a position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeStatus {
    Dead,
    Live { empty: usize },
}

/// Permutation of square indices, applied to masks a byte at a time.
#[derive(Clone)]
pub(crate) struct SquareMap {
    table: Box<[[u64; 256]; 8]>,
}

impl SquareMap {
    fn new(image: &[usize]) -> Self {
        let mut table = Box::new([[0u64; 256]; 8]);
        for (chunk, row) in table.iter_mut().enumerate() {
            for (byte, slot) in row.iter_mut().enumerate() {
                let mut out = 0u64;
                for bit in 0..8 {
                    if byte >> bit & 1 == 1 {
                        if let Some(&to) = image.get(chunk * 8 + bit) {
                            out |= 1 << to;
                        }
                    }
                }
                *slot = out;
            }
        }
        SquareMap { table }
    }

    #[inline]
    pub(crate) fn apply(&self, mask: u64) -> u64 {
        let mut out = 0;
        let mut m = mask;
        let mut chunk = 0;
        while m != 0 {
            out |= self.table[chunk][(m & 0xff) as usize];
            m >>= 8;
            chunk += 1;
        }
        out
    }
}

impl fmt::Debug for SquareMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SquareMap")
    }
}

/// Board symmetries a ruleset may be invariant under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// Left-right column reversal.
    Mirror,
    /// Top-bottom row reversal.
    Flip,
    /// Both reversals.
    Rotate,
}

/// A concrete game instance: grid geometry plus hyperedges.
#[derive(Clone, Debug)]
pub struct Ruleset {
    name: String,
    rows: usize,
    cols: usize,
    k: usize,
    vertices: u64,
    edges: Vec<Hyperedge>,
    edge_masks: Vec<u64>,
    incidence: Vec<Vec<u32>>,
    symmetries: Vec<(Symmetry, SquareMap)>,
}

impl Ruleset {
    /// Builds a ruleset over the full `rows x cols` grid. Every edge must have
    /// between 2 and `k` distinct in-bounds squares; duplicates are rejected.
    pub fn new(
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        k: usize,
        edges: Vec<Vec<Square>>,
    ) -> Result<Self> {
        check_geometry(rows, cols)?;
        let mut masks = Vec::with_capacity(edges.len());
        for squares in &edges {
            if squares.len() < 2 || squares.len() > k {
                return Err(Error::InvalidRuleset(format!(
                    "edge of size {} outside 2..={k}",
                    squares.len()
                )));
            }
            let mut mask = 0u64;
            for &sq in squares {
                let idx = index_in(rows, cols, sq).ok_or(Error::OutOfBounds(sq))?;
                if mask >> idx & 1 == 1 {
                    return Err(Error::InvalidRuleset(format!("square {sq} repeated in edge")));
                }
                mask |= 1 << idx;
            }
            if masks.contains(&mask) {
                return Err(Error::InvalidRuleset("duplicate edge".into()));
            }
            masks.push(mask);
        }
        let vertices = full_mask(rows * cols);
        Ok(Self::assemble(name.into(), rows, cols, k, vertices, masks))
    }

    /// Builds a sub-game ruleset from raw masks. Squares outside `vertices`
    /// do not exist in the game. Edges may have any nonzero size here (a
    /// maker-premarked square is expressed by dropping it from its edges);
    /// duplicate edges are merged.
    pub fn from_masks(
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        vertices: u64,
        masks: impl IntoIterator<Item = u64>,
    ) -> Result<Self> {
        check_geometry(rows, cols)?;
        let vertices = vertices & full_mask(rows * cols);
        let mut list: Vec<u64> = Vec::new();
        for m in masks {
            if m == 0 || m & !vertices != 0 {
                return Err(Error::InvalidRuleset("edge outside vertex set".into()));
            }
            if !list.contains(&m) {
                list.push(m);
            }
        }
        let k = list.iter().map(|m| m.count_ones() as usize).max().unwrap_or(1);
        Ok(Self::assemble(name.into(), rows, cols, k, vertices, list))
    }

    fn assemble(name: String, rows: usize, cols: usize, k: usize, vertices: u64, masks: Vec<u64>) -> Self {
        let n = rows * cols;
        let mut incidence = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(masks.len());
        for (id, &mask) in masks.iter().enumerate() {
            for idx in bits(mask) {
                incidence[idx].push(id as u32);
            }
            edges.push(Hyperedge { id, squares: bits(mask).map(|i| square_of(cols, i)).collect() });
        }
        let mut rules = Ruleset {
            name,
            rows,
            cols,
            k,
            vertices,
            edges,
            edge_masks: masks,
            incidence,
            symmetries: Vec::new(),
        };
        rules.symmetries = rules.detect_symmetries();
        rules
    }

    fn detect_symmetries(&self) -> Vec<(Symmetry, SquareMap)> {
        let (rows, cols) = (self.rows, self.cols);
        let mut found = Vec::new();
        let mut sorted = self.edge_masks.clone();
        sorted.sort_unstable();
        for sym in [Symmetry::Mirror, Symmetry::Flip, Symmetry::Rotate] {
            let image: Vec<usize> = (0..rows * cols)
                .map(|i| {
                    let (r, c) = (i / cols, i % cols);
                    let (r2, c2) = match sym {
                        Symmetry::Mirror => (r, cols - 1 - c),
                        Symmetry::Flip => (rows - 1 - r, c),
                        Symmetry::Rotate => (rows - 1 - r, cols - 1 - c),
                    };
                    r2 * cols + c2
                })
                .collect();
            let map = SquareMap::new(&image);
            if map.apply(self.vertices) != self.vertices {
                continue;
            }
            let mut mapped: Vec<u64> = self.edge_masks.iter().map(|&m| map.apply(m)).collect();
            mapped.sort_unstable();
            if mapped == sorted {
                found.push((sym, map));
            }
        }
        found
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }
    pub fn square_count(&self) -> usize {
        self.vertices.count_ones() as usize
    }
    pub fn vertex_mask(&self) -> u64 {
        self.vertices
    }
    pub fn edge_masks(&self) -> &[u64] {
        &self.edge_masks
    }
    /// Edge ids containing the square with the given index.
    pub fn incident(&self, idx: usize) -> &[u32] {
        &self.incidence[idx]
    }
    pub fn has_symmetry(&self, sym: Symmetry) -> bool {
        self.symmetries.iter().any(|(s, _)| *s == sym)
    }
    pub(crate) fn symmetry_maps(&self) -> impl Iterator<Item = &SquareMap> {
        self.symmetries.iter().map(|(_, m)| m)
    }

    pub fn index(&self, sq: Square) -> Result<usize> {
        match index_in(self.rows, self.cols, sq) {
            Some(i) if self.vertices >> i & 1 == 1 => Ok(i),
            _ => Err(Error::OutOfBounds(sq)),
        }
    }

    pub fn square(&self, idx: usize) -> Square {
        square_of(self.cols, idx)
    }

    pub fn mask_of(&self, squares: &[Square]) -> Result<u64> {
        squares.iter().try_fold(0u64, |m, &s| Ok(m | 1 << self.index(s)?))
    }

    pub fn squares_of(&self, mask: u64) -> Vec<Square> {
        bits(mask).map(|i| self.square(i)).collect()
    }

    /// Column-reversal image of a mask.
    pub fn mirror_mask(&self, mask: u64) -> u64 {
        let mut out = 0;
        for i in bits(mask) {
            let (r, c) = (i / self.cols, i % self.cols);
            out |= 1 << (r * self.cols + self.cols - 1 - c);
        }
        out
    }
}

fn check_geometry(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 || rows > 255 || cols > 255 || rows * cols > MAX_SQUARES {
        return Err(Error::InvalidRuleset(format!(
            "{rows}x{cols} board; at most {MAX_SQUARES} squares supported"
        )));
    }
    Ok(())
}

fn index_in(rows: usize, cols: usize, sq: Square) -> Option<usize> {
    let (r, c) = (sq.row as usize, sq.col as usize);
    (r >= 1 && r <= rows && c >= 1 && c <= cols).then(|| (r - 1) * cols + (c - 1))
}

fn square_of(cols: usize, idx: usize) -> Square {
    Square::new((idx / cols + 1) as u8, (idx % cols + 1) as u8)
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterates the set bit indices of a mask in increasing order.
pub fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// A board state. Cloning is cheap relative to search work; the engine also
/// uses [`Position::play`] / [`Position::undo`] in place.
#[derive(Clone)]
pub struct Position {
    rules: Arc<Ruleset>,
    maker: u64,
    breaker: u64,
    to_move: Side,
    /// Empty-square count per edge, or `DEAD`.
    edge_state: SmallVec<[u8; 96]>,
    /// `line_counts[l]` = number of live edges with exactly `l` empty squares.
    line_counts: SmallVec<[u32; 8]>,
}

impl PartialEq for Position {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.rules, &other.rules)
            && self.maker == other.maker
            && self.breaker == other.breaker
            && self.to_move == other.to_move
            && self.edge_state == other.edge_state
            && self.line_counts == other.line_counts
    }
}

impl Eq for Position {}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Position[{}]\n{}", self.rules.name, self.to_text())
    }
}

impl Position {
    /// Empty board, maker to move.
    pub fn new(rules: Arc<Ruleset>) -> Self {
        Self::from_marks_unchecked(rules, 0, 0, Side::Maker)
    }

    pub fn from_marks(rules: Arc<Ruleset>, maker: u64, breaker: u64, to_move: Side) -> Result<Self> {
        if maker & breaker != 0 {
            return Err(Error::Parse("square marked by both players".into()));
        }
        if (maker | breaker) & !rules.vertices != 0 {
            return Err(Error::Parse("mark outside the board".into()));
        }
        Ok(Self::from_marks_unchecked(rules, maker, breaker, to_move))
    }

    pub(crate) fn from_marks_unchecked(rules: Arc<Ruleset>, maker: u64, breaker: u64, to_move: Side) -> Self {
        let mut line_counts = smallvec![0u32; rules.k + 1];
        let empty = rules.vertices & !maker & !breaker;
        let edge_state = rules
            .edge_masks
            .iter()
            .map(|&m| {
                if m & breaker != 0 {
                    DEAD
                } else {
                    let l = (m & empty).count_ones() as usize;
                    line_counts[l] += 1;
                    l as u8
                }
            })
            .collect();
        Position { rules, maker, breaker, to_move, edge_state, line_counts }
    }

    pub fn rules(&self) -> &Arc<Ruleset> {
        &self.rules
    }
    pub fn to_move(&self) -> Side {
        self.to_move
    }
    pub fn set_to_move(&mut self, side: Side) {
        self.to_move = side;
    }
    pub fn maker_mask(&self) -> u64 {
        self.maker
    }
    pub fn breaker_mask(&self) -> u64 {
        self.breaker
    }
    pub fn empty_mask(&self) -> u64 {
        self.rules.vertices & !self.maker & !self.breaker
    }
    pub fn empty_count(&self) -> usize {
        self.empty_mask().count_ones() as usize
    }

    pub fn mark(&self, sq: Square) -> Result<Mark> {
        let i = self.rules.index(sq)?;
        Ok(self.mark_at(i))
    }

    pub fn mark_at(&self, idx: usize) -> Mark {
        if self.maker >> idx & 1 == 1 {
            Mark::Maker
        } else if self.breaker >> idx & 1 == 1 {
            Mark::Breaker
        } else {
            Mark::Empty
        }
    }

    pub fn edge_status(&self, id: usize) -> EdgeStatus {
        match self.edge_state[id] {
            DEAD => EdgeStatus::Dead,
            l => EdgeStatus::Live { empty: l as usize },
        }
    }

    /// Number of live edges with exactly `l` empty squares (`x_l`).
    pub fn line_count(&self, l: usize) -> usize {
        self.line_counts.get(l).copied().unwrap_or(0) as usize
    }

    pub fn live_edge_count(&self) -> usize {
        self.line_counts.iter().map(|&c| c as usize).sum()
    }

    /// Live edges as `(id, empty squares mask)`.
    pub fn live_edges(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        let empty = self.empty_mask();
        self.edge_state
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != DEAD)
            .map(move |(id, _)| (id, self.rules.edge_masks[id] & empty))
    }

    /// True when some edge is entirely maker-marked.
    pub fn has_completed_line(&self) -> bool {
        self.line_counts[0] > 0
    }

    /// `sum x_l * 2^-(l-1)` over l >= 1. Every term is dyadic and exact.
    pub fn potential(&self) -> f64 {
        self.line_counts
            .iter()
            .enumerate()
            .skip(1)
            .map(|(l, &x)| x as f64 * weight(l))
            .sum()
    }

    /// Potential carried by the live edges through an empty square.
    pub fn square_contribution(&self, sq: Square) -> Result<f64> {
        let i = self.rules.index(sq)?;
        if self.mark_at(i) != Mark::Empty {
            return Err(Error::Occupied(sq));
        }
        Ok(self.contribution_at(i))
    }

    pub fn contribution_at(&self, idx: usize) -> f64 {
        self.rules.incidence[idx]
            .iter()
            .map(|&e| self.edge_state[e as usize])
            .filter(|&s| s != DEAD)
            .map(|s| weight(s as usize))
            .sum()
    }

    /// Functional move: returns the successor, leaving `self` untouched.
    pub fn apply_move(&self, sq: Square) -> Result<Position> {
        let i = self.rules.index(sq)?;
        if self.mark_at(i) != Mark::Empty {
            return Err(Error::Occupied(sq));
        }
        let mut next = self.clone();
        next.play(i);
        Ok(next)
    }

    /// In-place move for the side to move. The square must be empty.
    pub fn play(&mut self, idx: usize) {
        debug_assert_eq!(self.mark_at(idx), Mark::Empty);
        let side = self.to_move;
        self.put(idx, side);
        self.to_move = side.opponent();
    }

    /// Reverts [`Position::play`] of the same square.
    pub fn undo(&mut self, idx: usize) {
        let side = self.to_move.opponent();
        debug_assert_eq!(
            self.mark_at(idx),
            if side == Side::Maker { Mark::Maker } else { Mark::Breaker }
        );
        let bit = 1u64 << idx;
        self.maker &= !bit;
        self.breaker &= !bit;
        self.refresh_incident(idx);
        self.to_move = side;
    }

    /// Places a mark of `side` without changing the side to move.
    pub fn put(&mut self, idx: usize, side: Side) {
        let bit = 1u64 << idx;
        match side {
            Side::Maker => {
                self.maker |= bit;
                for &e in &self.rules.incidence[idx] {
                    let s = &mut self.edge_state[e as usize];
                    if *s != DEAD {
                        self.line_counts[*s as usize] -= 1;
                        *s -= 1;
                        self.line_counts[*s as usize] += 1;
                    }
                }
            }
            Side::Breaker => {
                self.breaker |= bit;
                for &e in &self.rules.incidence[idx] {
                    let s = &mut self.edge_state[e as usize];
                    if *s != DEAD {
                        self.line_counts[*s as usize] -= 1;
                        *s = DEAD;
                    }
                }
            }
        }
    }

    fn refresh_incident(&mut self, idx: usize) {
        let empty = self.empty_mask();
        for &e in &self.rules.incidence[idx] {
            let e = e as usize;
            let m = self.rules.edge_masks[e];
            let old = self.edge_state[e];
            if old != DEAD {
                self.line_counts[old as usize] -= 1;
            }
            let new = if m & self.breaker != 0 { DEAD } else { (m & empty).count_ones() as u8 };
            if new != DEAD {
                self.line_counts[new as usize] += 1;
            }
            self.edge_state[e] = new;
        }
    }

    /// Recomputes all bookkeeping from the marks. Used to check the
    /// incremental updates.
    pub fn recomputed(&self) -> Position {
        Self::from_marks_unchecked(self.rules.clone(), self.maker, self.breaker, self.to_move)
    }

    /// The residual hypergraph: empty squares and live edges restricted to
    /// them, in row-major / edge-id order.
    pub fn residual(&self) -> ResidualView {
        let empty = self.empty_mask();
        let edges: Vec<ResidualEdge> = self
            .live_edges()
            .map(|(id, mask)| ResidualEdge { id, mask, squares: self.rules.squares_of(mask) })
            .collect();
        let incidence = bits(empty)
            .map(|i| {
                let ids = edges
                    .iter()
                    .filter(|e| e.mask >> i & 1 == 1)
                    .map(|e| e.id)
                    .collect();
                (self.rules.square(i), ids)
            })
            .collect();
        ResidualView { square_mask: empty, squares: self.rules.squares_of(empty), edges, incidence }
    }

    /// Column-reversed copy. Only meaningful for mirror-symmetric rulesets.
    pub fn mirrored(&self) -> Result<Position> {
        if !self.rules.has_symmetry(Symmetry::Mirror) {
            return Err(Error::InvalidRuleset("ruleset is not mirror symmetric".into()));
        }
        Ok(Self::from_marks_unchecked(
            self.rules.clone(),
            self.rules.mirror_mask(self.maker),
            self.rules.mirror_mask(self.breaker),
            self.to_move,
        ))
    }

    /// `rows` lines of `.`/`M`/`B`, then `to-move: M|B`.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.rules.cols + 1) * self.rules.rows + 12);
        for r in 0..self.rules.rows {
            for c in 0..self.rules.cols {
                out.push(match self.mark_at(r * self.rules.cols + c) {
                    Mark::Empty => '.',
                    Mark::Maker => 'M',
                    Mark::Breaker => 'B',
                });
            }
            out.push('\n');
        }
        out.push_str(match self.to_move {
            Side::Maker => "to-move: M\n",
            Side::Breaker => "to-move: B\n",
        });
        out
    }

    pub fn parse(rules: Arc<Ruleset>, text: &str) -> Result<Position> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() != rules.rows + 1 {
            return Err(Error::Parse(format!("expected {} lines, got {}", rules.rows + 1, lines.len())));
        }
        let (mut maker, mut breaker) = (0u64, 0u64);
        for (r, line) in lines[..rules.rows].iter().enumerate() {
            if line.chars().count() != rules.cols {
                return Err(Error::Parse(format!("row {} must have {} cells", r + 1, rules.cols)));
            }
            for (c, ch) in line.chars().enumerate() {
                let bit = 1u64 << (r * rules.cols + c);
                match ch {
                    '.' => {}
                    'M' => maker |= bit,
                    'B' => breaker |= bit,
                    other => return Err(Error::Parse(format!("unexpected cell {other:?}"))),
                }
            }
        }
        let to_move = match lines[rules.rows].trim_end() {
            "to-move: M" => Side::Maker,
            "to-move: B" => Side::Breaker,
            other => return Err(Error::Parse(format!("bad side line {other:?}"))),
        };
        Position::from_marks(rules, maker, breaker, to_move)
    }
}

#[inline]
pub(crate) fn weight(l: usize) -> f64 {
    // 2^-(l-1)
    f64::from_bits(((1023 - (l as i64 - 1)) as u64) << 52)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualEdge {
    pub id: usize,
    pub squares: Vec<Square>,
    pub mask: u64,
}

/// The game remaining after the current marks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualView {
    pub squares: Vec<Square>,
    pub square_mask: u64,
    pub edges: Vec<ResidualEdge>,
    /// Each empty square with the ids of its incident live edges.
    pub incidence: Vec<(Square, Vec<usize>)>,
}
