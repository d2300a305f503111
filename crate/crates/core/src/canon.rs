//! Transposition keys: board symmetries, and canonical forms of residual
//! hypergraphs for isomorphy detection.

use crate::board::{bits, Position, Side};
use crate::config::Config;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Key {
    /// Minimal `(maker, breaker)` masks over the ruleset's symmetries.
    Board { maker: u64, breaker: u64, maker_to_move: bool },
    /// Canonical code of the residual hypergraph. The empty count keeps
    /// moves on dead squares from mapping a node onto its own ancestor.
    /// Completed lines leave no residual edge, hence `won`.
    Residual { code: Box<[u8]>, empty: u8, won: bool, maker_to_move: bool },
}

/// Transposition key of a position under the configured equivalences.
pub fn canonical_key(pos: &Position, config: &Config) -> Key {
    let maker_to_move = pos.to_move() == Side::Maker;
    if config.features.isomorphy {
        let edges: Vec<u64> = pos.live_edges().map(|(_, m)| m).collect();
        let code = canonical_form(&edges).into_boxed_slice();
        let won = pos.has_completed_line();
        return Key::Residual { code, empty: pos.empty_count() as u8, won, maker_to_move };
    }
    let (mut maker, mut breaker) = (pos.maker_mask(), pos.breaker_mask());
    if config.features.symmetry {
        for map in pos.rules().symmetry_maps() {
            let cand = (map.apply(pos.maker_mask()), map.apply(pos.breaker_mask()));
            if cand < (maker, breaker) {
                (maker, breaker) = cand;
            }
        }
    }
    Key::Board { maker, breaker, maker_to_move }
}

/// Canonical code of a hypergraph given as square masks. Two hypergraphs
/// get equal codes iff they are isomorphic (duplicate edges and squares in
/// no edge are ignored).
pub fn canonical_form(edges: &[u64]) -> Vec<u8> {
    let mut edges: Vec<u64> = edges.iter().copied().filter(|&e| e != 0).collect();
    edges.sort_unstable();
    edges.dedup();
    let mut codes: Vec<Vec<u8>> = split_components(&edges).iter().map(|c| component_code(c)).collect();
    codes.sort();
    let mut out = Vec::new();
    for c in codes {
        out.push(0xff);
        out.extend(c);
    }
    out
}

fn split_components(edges: &[u64]) -> Vec<Vec<u64>> {
    let mut left: Vec<u64> = edges.to_vec();
    let mut out = Vec::new();
    while let Some(first) = left.pop() {
        let mut comp = vec![first];
        let mut span = first;
        loop {
            let before = comp.len();
            left.retain(|&e| {
                if e & span != 0 {
                    span |= e;
                    comp.push(e);
                    false
                } else {
                    true
                }
            });
            if comp.len() == before {
                break;
            }
        }
        out.push(comp);
    }
    out
}

struct Graph {
    /// For each vertex, the indices of its edges.
    vert_edges: Vec<Vec<usize>>,
    /// For each edge, its vertices.
    edge_verts: Vec<Vec<usize>>,
    twin: Vec<usize>,
}

fn component_code(edges: &[u64]) -> Vec<u8> {
    let span = edges.iter().fold(0, |m, e| m | e);
    let verts: Vec<usize> = bits(span).collect();
    let mut slot = [0usize; 64];
    for (i, &v) in verts.iter().enumerate() {
        slot[v] = i;
    }
    let edge_verts: Vec<Vec<usize>> = edges.iter().map(|&e| bits(e).map(|v| slot[v]).collect()).collect();
    let mut vert_edges = vec![Vec::new(); verts.len()];
    for (j, vs) in edge_verts.iter().enumerate() {
        for &v in vs {
            vert_edges[v].push(j);
        }
    }
    // twin classes: identical incident edge lists
    let mut order: Vec<usize> = (0..verts.len()).collect();
    order.sort_by(|&a, &b| vert_edges[a].cmp(&vert_edges[b]));
    let mut twin = vec![0; verts.len()];
    for w in 1..order.len() {
        let (a, b) = (order[w - 1], order[w]);
        twin[b] = if vert_edges[a] == vert_edges[b] { twin[a] } else { b };
    }
    if let Some(&first) = order.first() {
        twin[first] = first;
    }
    let g = Graph { vert_edges, edge_verts, twin };
    let colors = refine(&g, vec![0; verts.len()]);
    let mut best: Option<Vec<u8>> = None;
    search(&g, colors, &mut best);
    best.unwrap_or_default()
}

/// Colour refinement on the incidence graph until the vertex partition is
/// stable. Signatures are hashed multisets of neighbour colours; the old
/// colour stays the primary sort key, so cells only ever split.
fn refine(g: &Graph, mut colors: Vec<u32>) -> Vec<u32> {
    let mut cells = count_distinct(&colors);
    let mut buf: Vec<u32> = Vec::new();
    let mut edge_colors: Vec<u64> = vec![0; g.edge_verts.len()];
    let mut keyed: Vec<(u32, u64)> = Vec::with_capacity(colors.len());
    loop {
        for (e, vs) in g.edge_verts.iter().enumerate() {
            buf.clear();
            buf.extend(vs.iter().map(|&v| colors[v]));
            edge_colors[e] = multiset_hash(vs.len() as u64, &mut buf);
        }
        keyed.clear();
        for (v, es) in g.vert_edges.iter().enumerate() {
            buf.clear();
            // edge hashes folded to 32 bits keep the buffer type
            buf.extend(es.iter().map(|&e| (edge_colors[e] >> 32) as u32 ^ edge_colors[e] as u32));
            keyed.push((colors[v], multiset_hash(0, &mut buf)));
        }
        colors = ranks(&keyed);
        let now = count_distinct(&colors);
        if now == cells {
            return colors;
        }
        cells = now;
    }
}

fn multiset_hash(seed: u64, items: &mut [u32]) -> u64 {
    items.sort_unstable();
    items.iter().fold(seed ^ 0x9e37_79b9_7f4a_7c15, |h, &x| {
        (h ^ u64::from(x)).wrapping_mul(0x1000_0000_01b3).rotate_left(29)
    })
}

fn ranks<T: Ord + Copy>(sigs: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sigs.iter().map(|s| sorted.binary_search(s).unwrap() as u32).collect()
}

fn count_distinct(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn search(g: &Graph, colors: Vec<u32>, best: &mut Option<Vec<u8>>) {
    let n = colors.len();
    // first non-singleton cell, by colour
    let mut size = vec![0usize; n];
    for &c in &colors {
        size[c as usize] += 1;
    }
    let Some(target) = (0..n).find(|&c| size[c] > 1) else {
        let code = encode(g, &colors);
        if best.as_ref().map_or(true, |b| code < *b) {
            *best = Some(code);
        }
        return;
    };
    let mut tried_twins: Vec<usize> = Vec::new();
    for v in 0..n {
        if colors[v] as usize != target || tried_twins.contains(&g.twin[v]) {
            continue;
        }
        tried_twins.push(g.twin[v]);
        let next: Vec<u32> = colors
            .iter()
            .enumerate()
            .map(|(u, &c)| 2 * c + u32::from(c as usize == target && u != v))
            .collect();
        search(g, refine(g, next), best);
    }
}

fn encode(g: &Graph, labels: &[u32]) -> Vec<u8> {
    let mut edges: Vec<Vec<u8>> = g
        .edge_verts
        .iter()
        .map(|vs| {
            let mut l: Vec<u8> = vs.iter().map(|&v| labels[v] as u8).collect();
            l.sort_unstable();
            l
        })
        .collect();
    edges.sort();
    let mut out = vec![labels.len() as u8, edges.len() as u8];
    for e in edges {
        out.push(e.len() as u8);
        out.extend(e);
    }
    out
}
