//! Game instances: plain `(m, n, k)` boards and the truncated `4 x n` block,
//! plus the tiling coverage check for the block.

use serde::{Deserialize, Serialize};

use crate::board::{bits, Ruleset, Square};
use crate::error::{Error, Result};

/// The four line directions on a grid, as (row step, col step).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Horizontal,
    Vertical,
    /// Down and to the right.
    Diagonal,
    /// Down and to the left.
    AntiDiagonal,
}

impl Direction {
    pub const ALL: [Direction; 4] =
        [Direction::Horizontal, Direction::Vertical, Direction::Diagonal, Direction::AntiDiagonal];

    pub fn step(self) -> (i64, i64) {
        match self {
            Direction::Horizontal => (0, 1),
            Direction::Vertical => (1, 0),
            Direction::Diagonal => (1, 1),
            Direction::AntiDiagonal => (1, -1),
        }
    }
}

fn sq(r: usize, c: usize) -> Square {
    Square::new(r as u8, c as u8)
}

/// All horizontal, vertical and diagonal runs of exactly `k` squares on an
/// `m x n` board.
pub fn generate_mnk(m: usize, n: usize, k: usize) -> Result<Ruleset> {
    if k < 2 || m == 0 || n == 0 {
        return Err(Error::InvalidRuleset(format!("({m},{n},{k}) needs m,n >= 1 and k >= 2")));
    }
    let mut edges = Vec::new();
    for dir in Direction::ALL {
        let (dr, dc) = dir.step();
        for r in 1..=m as i64 {
            for c in 1..=n as i64 {
                let end_r = r + dr * (k as i64 - 1);
                let end_c = c + dc * (k as i64 - 1);
                if end_r < 1 || end_r > m as i64 || end_c < 1 || end_c > n as i64 {
                    continue;
                }
                let mut line: Vec<Square> =
                    (0..k as i64).map(|t| sq((r + dr * t) as usize, (c + dc * t) as usize)).collect();
                line.sort();
                edges.push(line);
            }
        }
    }
    Ruleset::new(format!("mnk({m},{n},{k})"), m, n, k, edges)
}

pub const TRUNC_ROWS: usize = 4;
pub const TRUNC_MIN_N: usize = 7;

/// The truncated `4 x n` block whose edges cover, under tiling, every
/// 7-line of the infinite board:
///
/// * per row, the leftmost and rightmost horizontal 4-lines, and the
///   horizontal 7-lines starting at columns `2..=n-7`;
/// * every column (a vertical 4-line);
/// * every diagonal 4-line of both slopes;
/// * four corner 3-lines and two corner 2-lines for diagonals that cross
///   a vertical block border (left-end pieces and their column mirrors).
pub fn generate_trunc7(n: usize) -> Result<Ruleset> {
    if n < TRUNC_MIN_N {
        return Err(Error::InvalidRuleset(format!("truncated block needs n >= {TRUNC_MIN_N}, got {n}")));
    }
    let mut edges: Vec<Vec<Square>> = Vec::new();
    for i in 1..=TRUNC_ROWS {
        edges.push((1..=4).map(|j| sq(i, j)).collect());
        edges.push((n - 3..=n).map(|j| sq(i, j)).collect());
        for j in 2..=n.saturating_sub(7) {
            edges.push((j..j + 7).map(|c| sq(i, c)).collect());
        }
    }
    for j in 1..=n {
        edges.push((1..=TRUNC_ROWS).map(|i| sq(i, j)).collect());
    }
    for j in 1..=n - 3 {
        edges.push((0..4).map(|t| sq(1 + t, j + t)).collect());
    }
    for j in 1..=n - 3 {
        let mut e: Vec<Square> = (0..4).map(|t| sq(4 - t, j + t)).collect();
        e.sort();
        edges.push(e);
    }
    let corner3 = [
        vec![sq(3, 1), sq(2, 2), sq(1, 3)],
        vec![sq(2, 1), sq(3, 2), sq(4, 3)],
        vec![sq(3, n), sq(2, n - 1), sq(1, n - 2)],
        vec![sq(2, n), sq(3, n - 1), sq(4, n - 2)],
    ];
    let corner2 = [vec![sq(2, 1), sq(1, 2)], vec![sq(2, n), sq(1, n - 1)]];
    for mut e in corner3.into_iter().chain(corner2) {
        e.sort();
        edges.push(e);
    }
    Ruleset::new(format!("trunc7({n})"), TRUNC_ROWS, n, 7, edges)
}

/// Squares of the corner 3-lines and 2-lines of [`generate_trunc7`], in the
/// order they are appended. Used to build mutated edge sets.
pub fn trunc7_corner_edges(n: usize) -> Vec<Vec<Square>> {
    generate_trunc7(n)
        .map(|r| r.edges().iter().filter(|e| e.squares.len() < 4).map(|e| e.squares.clone()).collect())
        .unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UncoveredLine {
    pub dir: Direction,
    /// Global `[row, col]` of the first square, 1-based in the central block.
    pub anchor: [i64; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub n: usize,
    pub checked: usize,
    pub passed: bool,
    pub uncovered: Vec<UncoveredLine>,
}

/// Checks that tiling the plane with copies of a `4 x n` block covers every
/// 7-line: for each 7-line anchored in one block, some block it touches
/// holds an edge contained in the line. By translation invariance this one
/// block of anchors stands for the whole plane.
pub fn verify_block_coverage(rules: &Ruleset, n: usize) -> CoverageReport {
    const LEN: i64 = 7;
    let rows = TRUNC_ROWS as i64;
    let cols = n as i64;
    let shape_ok = rules.rows() == TRUNC_ROWS && rules.cols() == n;
    let masks = rules.edge_masks();
    let mut uncovered = Vec::new();
    let mut checked = 0;
    for dir in Direction::ALL {
        let (dr, dc) = dir.step();
        for r in 0..rows {
            for c in 0..cols {
                checked += 1;
                // line squares grouped by block, as local masks
                let mut pieces: Vec<((i64, i64), u64)> = Vec::with_capacity(3);
                for t in 0..LEN {
                    let (gr, gc) = (r + dr * t, c + dc * t);
                    let block = (gr.div_euclid(rows), gc.div_euclid(cols));
                    let local = gr.rem_euclid(rows) * cols + gc.rem_euclid(cols);
                    match pieces.iter_mut().find(|(b, _)| *b == block) {
                        Some((_, m)) => *m |= 1 << local,
                        None => pieces.push((block, 1 << local)),
                    }
                }
                let covered = shape_ok
                    && pieces.iter().any(|&(_, piece)| masks.iter().any(|&e| e & !piece == 0));
                if !covered {
                    uncovered.push(UncoveredLine { dir, anchor: [r + 1, c + 1] });
                }
            }
        }
    }
    CoverageReport { n, checked, passed: uncovered.is_empty(), uncovered }
}

/// Human-readable list of the squares of a 7-line, for reports.
pub fn describe_line(line: &UncoveredLine) -> String {
    let (dr, dc) = line.dir.step();
    let cells: Vec<String> =
        (0..7).map(|t| format!("({},{})", line.anchor[0] + dr * t, line.anchor[1] + dc * t)).collect();
    format!("{:?} {}", line.dir, cells.join(" "))
}

/// Number of edges of each size, `sizes[s]`.
pub fn edge_size_histogram(rules: &Ruleset) -> Vec<usize> {
    let mut sizes = vec![0; rules.k() + 1];
    for &m in rules.edge_masks() {
        sizes[bits(m).count()] += 1;
    }
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mnk_counts() {
        assert_eq!(generate_mnk(4, 7, 7).unwrap().edges().len(), 4);
        assert_eq!(generate_mnk(3, 3, 3).unwrap().edges().len(), 8);
        assert_eq!(generate_mnk(6, 6, 7).unwrap().edges().len(), 0);
        assert!(generate_mnk(3, 3, 1).is_err());
    }

    #[test]
    fn trunc7_family_counts() {
        let n = 12;
        let r = generate_trunc7(n).unwrap();
        let per_row = r
            .edges()
            .iter()
            .filter(|e| e.squares.iter().all(|s| s.row == 1) && e.squares.len() >= 4)
            .count();
        assert_eq!(per_row, 2 + 4);
        let columns = r.edges().iter().filter(|e| e.squares.len() == 4 && e.squares.iter().all(|s| s.col == e.squares[0].col)).count();
        assert_eq!(columns, n);
        let h = edge_size_histogram(&r);
        assert_eq!(h[2], 2);
        assert_eq!(h[3], 4);
        assert_eq!(h[7], 4 * (n - 8));
        assert_eq!(h[4], 8 + n + 2 * (n - 3));
    }

    #[test]
    fn trunc7_edge_sizes() {
        for n in 7..=14 {
            let r = generate_trunc7(n).unwrap();
            assert!(r.edges().iter().all(|e| [2, 3, 4, 7].contains(&e.squares.len())));
        }
        assert!(generate_trunc7(6).is_err());
    }

    #[test]
    fn interior_lines_alone_miss_verticals() {
        let n = 10;
        let edges = (1..=4u8)
            .flat_map(|i| (2..=n - 7).map(move |j| (j..j + 7).map(|c| Square::new(i, c as u8)).collect()))
            .collect();
        let r = Ruleset::new("interior", 4, n, 7, edges).unwrap();
        let report = verify_block_coverage(&r, n);
        assert!(!report.passed);
        let verticals = report.uncovered.iter().filter(|l| l.dir == Direction::Vertical).count();
        assert_eq!(verticals, 4 * n);
    }
}
