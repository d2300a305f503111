//! Best-first proof number search over an AND/OR DAG.
//!
//! OR nodes have maker to move, AND nodes breaker. Nodes live in an arena
//! and are shared through a transposition table keyed by [`canonical_key`],
//! so the tree is a DAG and value updates are pushed to every parent.
//! Child positions are normalized (pairings removed, single forced replies
//! and eager exchanges played) before lookup, so a node's type is the side
//! to move after normalization.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use std::hash::BuildHasher;

use hashbrown::HashTable;
use rustc_hash::{FxBuildHasher, FxHashMap};
use serde::{Deserialize, Serialize};

use crate::board::{Position, Ruleset, Side, Square};
use crate::canon::{canonical_key, Key};
use crate::config::{Coefficients, Config, Limits};
use crate::decomposition::{
    combine_cut_vertex, combine_shared_edge, plan_split, Hypergraph, SplitKind, SplitPlan, SubGame,
};
use crate::error::{Error, Result};
use crate::reductions::{candidate_mask, normalize, order_moves, GameValue, LineScan, TerminalStatus};

pub type NodeId = u32;

const NO_LINK: u32 = u32::MAX;
const INF: f64 = f64::INFINITY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeType {
    Or,
    And,
}

impl NodeType {
    pub fn of(side: Side) -> Self {
        match side {
            Side::Maker => NodeType::Or,
            Side::Breaker => NodeType::And,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Proven,
    Disproven,
    Open,
}

/// Snapshot of one search node.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchNode {
    pub id: NodeId,
    pub node_type: NodeType,
    pub pn: f64,
    pub dn: f64,
    /// Children with the move that leads to each.
    pub children: Vec<(NodeId, Square)>,
    pub expanded: bool,
    pub status: NodeStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveValue {
    MakerWin,
    BreakerWin,
    Unknown,
}

impl From<GameValue> for SolveValue {
    fn from(v: GameValue) -> Self {
        match v {
            GameValue::MakerWin => SolveValue::MakerWin,
            GameValue::BreakerWin => SolveValue::BreakerWin,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Solved,
    TimeLimit,
    MemoryLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub value: SolveValue,
    /// Distinct search nodes allocated, including those of decomposition
    /// sub-searches.
    pub nodes_created: u64,
    pub elapsed: Duration,
    pub stop_reason: StopReason,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableStats {
    pub hits: u64,
    pub misses: u64,
    /// Hits where the stored representative differs from the probed board
    /// (symmetric or isomorphic transposition).
    pub equivalence_hits: u64,
    pub splits: u64,
    pub subgame_cache_hits: u64,
}

/// Breaker-win probability of the logistic leaf model:
/// `1 - sigmoid(c0 + c_nodeT*nodeT + c_emptyS*emptyS + c_pot*pot)`, with
/// `nodeT` 1 for OR and 0 for AND nodes.
pub fn prob_breaker_win(node_type: NodeType, empty_squares: usize, pot: f64, c: &Coefficients) -> f64 {
    let node_t = match node_type {
        NodeType::Or => 1.0,
        NodeType::And => 0.0,
    };
    let log_odds = c.c0 + c.c_node_type * node_t + c.c_empty * empty_squares as f64 + c.c_pot * pot;
    1.0 - 1.0 / (1.0 + (-log_odds).exp())
}

/// Initial `(pn, dn)` of a fresh non-terminal leaf.
///
/// Heuristic dn is `alpha^pot(b)` at AND leaves and
/// `alpha^(pot(parent) - min sibling pot + pot(b))` at OR leaves; heuristic
/// pn is `1 + beta * prob_breaker_win`.
pub fn init_leaf_values(
    pos: &Position,
    parent_potential: Option<f64>,
    min_sibling_potential: Option<f64>,
    config: &Config,
) -> Result<(f64, f64)> {
    let f = &config.features;
    let node_type = NodeType::of(pos.to_move());
    let pot = pos.potential();
    let dn = if f.heuristic_dn {
        match node_type {
            NodeType::And => config.alpha.powf(pot),
            NodeType::Or => {
                let (Some(p), Some(s)) = (parent_potential, min_sibling_potential) else {
                    return Err(Error::MissingParentInfo);
                };
                config.alpha.powf(p - s + pot)
            }
        }
    } else {
        1.0
    };
    let pn = if f.heuristic_pn {
        1.0 + config.beta * prob_breaker_win(node_type, pos.empty_count(), pot, &config.coefficients)
    } else {
        1.0
    };
    Ok((pn, dn))
}

#[derive(Clone, Debug)]
struct Node {
    maker: u64,
    breaker: u64,
    pn: f64,
    dn: f64,
    first_child: u32,
    child_count: u32,
    parent_head: u32,
    side: Side,
    expanded: bool,
}

impl Node {
    fn status(&self) -> NodeStatus {
        if self.pn == 0.0 {
            NodeStatus::Proven
        } else if self.dn == 0.0 {
            NodeStatus::Disproven
        } else {
            NodeStatus::Open
        }
    }
}

/// Budget and caches shared by a search and its decomposition sub-searches.
struct Context {
    config: Config,
    deadline: Option<Instant>,
    max_nodes: Option<u64>,
    live_nodes: u64,
    created: u64,
    stats: TableStats,
    subgames: FxHashMap<Vec<u64>, GameValue>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Interrupt {
    Time,
    Memory,
}

impl From<Interrupt> for StopReason {
    fn from(i: Interrupt) -> Self {
        match i {
            Interrupt::Time => StopReason::TimeLimit,
            Interrupt::Memory => StopReason::MemoryLimit,
        }
    }
}

/// Node storage of one search.
struct Dag {
    rules: Arc<Ruleset>,
    nodes: Vec<Node>,
    links: Vec<(u32, u8)>,
    parents: Vec<(u32, u32)>,
    table: Table,
}

/// Transposition table. Board keys are the stored masks of the node itself,
/// so that table only holds node ids; residual codes are kept alongside.
#[derive(Default)]
struct Table {
    boards: HashTable<NodeId>,
    residuals: FxHashMap<Key, NodeId>,
}

fn board_hash(maker: u64, breaker: u64, maker_to_move: bool) -> u64 {
    FxBuildHasher.hash_one((maker, breaker, maker_to_move))
}

impl Table {
    fn get(&self, nodes: &[Node], key: &Key) -> Option<NodeId> {
        match *key {
            Key::Board { maker, breaker, maker_to_move } => {
                let side = if maker_to_move { Side::Maker } else { Side::Breaker };
                self.boards
                    .find(board_hash(maker, breaker, maker_to_move), |&id| {
                        let n = &nodes[id as usize];
                        n.maker == maker && n.breaker == breaker && n.side == side
                    })
                    .copied()
            }
            Key::Residual { .. } => self.residuals.get(key).copied(),
        }
    }

    fn insert(&mut self, nodes: &[Node], key: Key, id: NodeId) {
        match key {
            Key::Board { maker, breaker, maker_to_move } => {
                self.boards.insert_unique(board_hash(maker, breaker, maker_to_move), id, |&i| {
                    let n = &nodes[i as usize];
                    board_hash(n.maker, n.breaker, n.side == Side::Maker)
                });
            }
            Key::Residual { .. } => {
                self.residuals.insert(key, id);
            }
        }
    }
}

impl Dag {
    fn new(rules: Arc<Ruleset>) -> Self {
        Dag { rules, nodes: Vec::new(), links: Vec::new(), parents: Vec::new(), table: Table::default() }
    }

    fn position(&self, id: NodeId) -> Position {
        let n = &self.nodes[id as usize];
        Position::from_marks_unchecked(self.rules.clone(), n.maker, n.breaker, n.side)
    }

    fn children(&self, id: NodeId) -> &[(u32, u8)] {
        let n = &self.nodes[id as usize];
        &self.links[n.first_child as usize..(n.first_child + n.child_count) as usize]
    }

    fn add_parent(&mut self, child: NodeId, parent: NodeId) {
        let head = self.nodes[child as usize].parent_head;
        self.parents.push((parent, head));
        self.nodes[child as usize].parent_head = (self.parents.len() - 1) as u32;
    }

    fn parents_of(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut link = self.nodes[id as usize].parent_head;
        while link != NO_LINK {
            let (p, next) = self.parents[link as usize];
            out.push(p);
            link = next;
        }
        out
    }

    /// Values implied by the children.
    fn combined(&self, id: NodeId) -> (f64, f64) {
        let n = &self.nodes[id as usize];
        let kids = self.children(id);
        let (mut min, mut sum) = (INF, 0.0f64);
        for &(c, _) in kids {
            let c = &self.nodes[c as usize];
            let (m, s) = match n.side {
                Side::Maker => (c.pn, c.dn),
                Side::Breaker => (c.dn, c.pn),
            };
            min = min.min(m);
            sum += s;
        }
        match n.side {
            Side::Maker => (min, sum),
            Side::Breaker => (sum, min),
        }
    }
}

/// A solver holding the search DAG of its last run.
pub struct Search {
    ctx: Context,
    dag: Dag,
    root: Option<NodeId>,
}

/// One-shot solve.
pub fn solve(position: &Position, config: &Config, limits: Limits) -> SolveResult {
    Search::new(config.clone(), limits).solve(position)
}

impl Search {
    pub fn new(config: Config, limits: Limits) -> Self {
        let deadline = limits.time.map(|t| Instant::now() + t);
        Search {
            ctx: Context {
                config,
                deadline,
                max_nodes: limits.max_nodes,
                live_nodes: 0,
                created: 0,
                stats: TableStats::default(),
                subgames: FxHashMap::default(),
            },
            dag: Dag::new(Arc::new(Ruleset::from_masks("none", 1, 1, 0, []).expect("trivial ruleset"))),
            root: None,
        }
    }

    pub fn config(&self) -> &Config {
        &self.ctx.config
    }

    /// Runs to a proof, a disproof or a limit. The DAG stays available for
    /// inspection afterwards.
    pub fn solve(&mut self, position: &Position) -> SolveResult {
        let start = Instant::now();
        self.dag = Dag::new(position.rules().clone());
        self.ctx.live_nodes = 0;
        let outcome = run(&mut self.dag, &mut self.ctx, position.clone());
        let (value, stop_reason) = match outcome {
            Ok(v) => (v.into(), StopReason::Solved),
            Err(i) => (SolveValue::Unknown, i.into()),
        };
        self.root = if self.dag.nodes.is_empty() { None } else { Some(0) };
        SolveResult { value, nodes_created: self.ctx.created, elapsed: start.elapsed(), stop_reason }
    }

    pub fn stats(&self) -> TableStats {
        self.ctx.stats
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn node_count(&self) -> usize {
        self.dag.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> SearchNode {
        let n = &self.dag.nodes[id as usize];
        SearchNode {
            id,
            node_type: NodeType::of(n.side),
            pn: n.pn,
            dn: n.dn,
            children: self
                .dag
                .children(id)
                .iter()
                .map(|&(c, m)| (c, self.dag.rules.square(m as usize)))
                .collect(),
            expanded: n.expanded,
            status: n.status(),
        }
    }

    /// The (normalized) position stored for a node.
    pub fn position(&self, id: NodeId) -> Position {
        self.dag.position(id)
    }

    /// Stored `(pn, dn)` against the recursion over stored child values, for
    /// every expanded node with children. Returns the offending node.
    pub fn check_local_consistency(&self) -> std::result::Result<(), NodeId> {
        for id in 0..self.dag.nodes.len() as NodeId {
            let n = &self.dag.nodes[id as usize];
            if !n.expanded || n.child_count == 0 {
                continue;
            }
            let (pn, dn) = self.dag.combined(id);
            let close = |a: f64, b: f64| a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
            if !(close(pn, n.pn) && close(dn, n.dn)) {
                return Err(id);
            }
        }
        Ok(())
    }

    /// The line followed by node selection from the root: min-pn child at
    /// OR nodes, min-dn child at AND nodes. Positions along the way.
    pub fn principal_line(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let Some(mut id) = self.root else { return out };
        loop {
            out.push(self.dag.position(id));
            let kids = self.dag.children(id);
            if kids.is_empty() || out.len() > 128 {
                return out;
            }
            id = best_child(&self.dag, id);
        }
    }

    /// Writes one CSV row per solved node:
    /// `node_type,empty_squares,potential,label` with node type 1 for OR,
    /// label 1 for breaker win.
    pub fn export_training_rows<W: Write>(&self, sink: W) -> Result<u64> {
        let mut w = std::io::BufWriter::new(sink);
        writeln!(w, "node_type,empty_squares,potential,label")?;
        let mut rows = 0;
        for id in 0..self.dag.nodes.len() as NodeId {
            let n = &self.dag.nodes[id as usize];
            let label = match n.status() {
                NodeStatus::Proven => 0,
                NodeStatus::Disproven => 1,
                NodeStatus::Open => continue,
            };
            let pos = self.dag.position(id);
            let node_type = u8::from(n.side == Side::Maker);
            writeln!(w, "{},{},{},{}", node_type, pos.empty_count(), pos.potential(), label)?;
            rows += 1;
        }
        w.flush()?;
        Ok(rows)
    }

    /// Normalized successor positions of a position, one per distinct
    /// transposition key, with the move that leads to each.
    pub fn successors(&self, pos: &Position) -> Vec<(Square, Position, TerminalStatus)> {
        let f = &self.ctx.config.features;
        let scan = LineScan::new(pos);
        let mask = candidate_mask(pos, &scan, f);
        let mut seen: Vec<Key> = Vec::new();
        let mut out = Vec::new();
        for m in order_moves(pos, mask, self.ctx.config.order) {
            let mut child = pos.clone();
            child.play(m);
            let (status, _) = normalize(&mut child, f);
            let key = canonical_key(&child, &self.ctx.config);
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            out.push((pos.rules().square(m), child, status));
        }
        out
    }

    /// Normalizes a position with this search's features.
    pub fn normalized(&self, pos: &Position) -> (Position, TerminalStatus) {
        let mut p = pos.clone();
        let (status, _) = normalize(&mut p, &self.ctx.config.features);
        (p, status)
    }
}

fn best_child(dag: &Dag, id: NodeId) -> NodeId {
    let n = &dag.nodes[id as usize];
    let mut best = NO_LINK;
    let mut best_val = INF;
    for &(c, _) in dag.children(id) {
        let cn = &dag.nodes[c as usize];
        let v = if n.side == Side::Maker { cn.pn } else { cn.dn };
        if best == NO_LINK || v < best_val {
            best = c;
            best_val = v;
        }
    }
    best
}

fn solved(n: &Node) -> Option<GameValue> {
    if n.pn == 0.0 {
        Some(GameValue::MakerWin)
    } else if n.dn == 0.0 {
        Some(GameValue::BreakerWin)
    } else {
        None
    }
}

fn check_limits(ctx: &Context) -> std::result::Result<(), Interrupt> {
    if ctx.max_nodes.is_some_and(|m| ctx.live_nodes >= m) {
        return Err(Interrupt::Memory);
    }
    if ctx.deadline.is_some_and(|d| Instant::now() >= d) {
        return Err(Interrupt::Time);
    }
    Ok(())
}

fn run(dag: &mut Dag, ctx: &mut Context, mut root: Position) -> std::result::Result<GameValue, Interrupt> {
    let (status, _) = normalize(&mut root, &ctx.config.features);
    let root_pot = root.potential();
    let key = canonical_key(&root, &ctx.config);
    let root_id = new_node(dag, ctx, &root, &root, key, status, Some(root_pot), Some(root_pot))?;
    let mut iterations: u64 = 0;
    loop {
        if let Some(v) = solved(&dag.nodes[root_id as usize]) {
            return Ok(v);
        }
        iterations += 1;
        if iterations % 64 == 0 {
            check_limits(ctx)?;
        }
        let mut leaf = root_id;
        while dag.nodes[leaf as usize].expanded {
            leaf = best_child(dag, leaf);
        }
        expand(dag, ctx, leaf)?;
        update_ancestors(dag, leaf);
    }
}

/// Allocates a node for a normalized position and initializes its values.
fn new_node(
    dag: &mut Dag,
    ctx: &mut Context,
    pos: &Position,
    seed: &Position,
    key: Key,
    status: TerminalStatus,
    parent_pot: Option<f64>,
    min_sibling_pot: Option<f64>,
) -> std::result::Result<NodeId, Interrupt> {
    if ctx.max_nodes.is_some_and(|m| ctx.live_nodes >= m) {
        return Err(Interrupt::Memory);
    }
    let (pn, dn) = match status.game_value() {
        Some(GameValue::MakerWin) => (0.0, INF),
        Some(GameValue::BreakerWin) => (INF, 0.0),
        None => init_leaf_values(seed, parent_pot, min_sibling_pot, &ctx.config)
            .expect("parent potentials are always supplied"),
    };
    let f = &ctx.config.features;
    let pn = if f.mobility && status.game_value().is_none() && pos.to_move() == Side::Breaker {
        let replies = candidate_mask(pos, &LineScan::new(pos), f).count_ones();
        pn * replies.max(1) as f64
    } else {
        pn
    };
    let id = dag.nodes.len() as NodeId;
    // board-keyed nodes store the canonical representative
    let (maker, breaker) = match key {
        Key::Board { maker, breaker, .. } => (maker, breaker),
        Key::Residual { .. } => (pos.maker_mask(), pos.breaker_mask()),
    };
    dag.nodes.push(Node {
        maker,
        breaker,
        pn,
        dn,
        first_child: 0,
        child_count: 0,
        parent_head: NO_LINK,
        side: pos.to_move(),
        expanded: status.is_decided(),
    });
    dag.table.insert(&dag.nodes, key, id);
    ctx.live_nodes += 1;
    ctx.created += 1;
    Ok(id)
}

fn expand(dag: &mut Dag, ctx: &mut Context, id: NodeId) -> std::result::Result<(), Interrupt> {
    let pos = dag.position(id);
    let features = ctx.config.features;
    if features.components && pos.to_move() == Side::Maker {
        let h = Hypergraph { edges: pos.live_edges().collect() };
        let rules = dag.rules.clone();
        let plan = plan_split(&h, &|i| rules.square(i));
        if plan.kind != SplitKind::None {
            ctx.stats.splits += 1;
            if let Some(value) = solve_split(ctx, &dag.rules, &plan)? {
                let n = &mut dag.nodes[id as usize];
                (n.pn, n.dn) = match value {
                    GameValue::MakerWin => (0.0, INF),
                    GameValue::BreakerWin => (INF, 0.0),
                };
                n.expanded = true;
                return Ok(());
            }
        }
    }

    let scan = LineScan::new(&pos);
    let mask = candidate_mask(&pos, &scan, &features);
    let moves = order_moves(&pos, mask, ctx.config.order);
    let parent_pot = pos.potential();

    struct Pending {
        mv: u8,
        key: Key,
        pos: Position,
        /// Position whose values seed the leaf: the child itself, or the
        /// breaker-to-move position before a collapsed forced reply.
        seed: Option<Position>,
        status: TerminalStatus,
        existing: Option<NodeId>,
    }
    let mut pending: Vec<Pending> = Vec::with_capacity(moves.len());
    for m in moves {
        let mut child = pos.clone();
        child.play(m);
        let raw = child.clone();
        let (status, _) = normalize(&mut child, &features);
        let seed = (child.to_move() == pos.to_move()).then_some(raw);
        let key = canonical_key(&child, &ctx.config);
        if pending.iter().any(|p| p.key == key) {
            continue;
        }
        let existing = dag.table.get(&dag.nodes, &key);
        match existing {
            Some(e) => {
                ctx.stats.hits += 1;
                let en = &dag.nodes[e as usize];
                if en.maker != child.maker_mask() || en.breaker != child.breaker_mask() {
                    ctx.stats.equivalence_hits += 1;
                }
            }
            None => ctx.stats.misses += 1,
        }
        pending.push(Pending { mv: m as u8, key, pos: child, seed, status, existing });
    }
    let min_pot = pending.iter().map(|p| p.seed.as_ref().unwrap_or(&p.pos).potential()).fold(INF, f64::min);

    let first = dag.links.len() as u32;
    let mut child_ids = Vec::with_capacity(pending.len());
    for p in pending {
        let cid = match p.existing {
            Some(e) => e,
            None => {
                let seed = p.seed.as_ref().unwrap_or(&p.pos);
                new_node(dag, ctx, &p.pos, seed, p.key, p.status, Some(parent_pot), Some(min_pot))?
            }
        };
        dag.links.push((cid, p.mv));
        child_ids.push(cid);
    }
    for cid in child_ids {
        dag.add_parent(cid, id);
    }
    let n = &mut dag.nodes[id as usize];
    n.first_child = first;
    n.child_count = dag.links.len() as u32 - first;
    n.expanded = true;
    if n.child_count == 0 {
        // nothing worth playing: maker cannot complete a line
        (n.pn, n.dn) = (INF, 0.0);
    }
    Ok(())
}

/// Recomputes values from `start` upwards through every parent whose values
/// change.
fn update_ancestors(dag: &mut Dag, start: NodeId) {
    let mut stack = vec![start];
    let mut first = true;
    while let Some(id) = stack.pop() {
        let n = &dag.nodes[id as usize];
        let (pn, dn) = if n.child_count > 0 { dag.combined(id) } else { (n.pn, n.dn) };
        let changed = pn != n.pn || dn != n.dn;
        if changed || first {
            let n = &mut dag.nodes[id as usize];
            n.pn = pn;
            n.dn = dn;
            stack.extend(dag.parents_of(id));
        }
        first = false;
    }
}

fn solve_split(
    ctx: &mut Context,
    rules: &Arc<Ruleset>,
    plan: &SplitPlan,
) -> std::result::Result<Option<GameValue>, Interrupt> {
    use GameValue::{BreakerWin, MakerWin};
    match plan.kind {
        SplitKind::Components => {
            for game in plan.component_games() {
                if solve_subgame(ctx, rules, &game)? == MakerWin {
                    return Ok(Some(MakerWin));
                }
            }
            Ok(Some(BreakerWin))
        }
        SplitKind::CutVertex | SplitKind::SharedEdge => {
            let games = match plan.kind {
                SplitKind::CutVertex => plan.cut_vertex_games(),
                _ => plan.shared_edge_games(),
            }
            .expect("plan kind matches");
            let w1 = solve_subgame(ctx, rules, &games[0])?;
            if w1 == MakerWin {
                return Ok(Some(MakerWin));
            }
            let w2 = solve_subgame(ctx, rules, &games[1])?;
            if w2 == MakerWin {
                return Ok(Some(MakerWin));
            }
            let w1x = solve_subgame(ctx, rules, &games[2])?;
            if w1x == BreakerWin {
                return Ok(Some(BreakerWin));
            }
            let w2x = solve_subgame(ctx, rules, &games[3])?;
            Ok(match plan.kind {
                SplitKind::CutVertex => Some(combine_cut_vertex(w1, w2, w1x, w2x)),
                _ => combine_shared_edge(w1, w2, w1x, w2x),
            })
        }
        SplitKind::None => unreachable!("no split to solve"),
    }
}

/// Solves a sub-hypergraph game with maker to move in a fresh DAG sharing
/// the budget. Results are cached by edge set.
fn solve_subgame(ctx: &mut Context, rules: &Arc<Ruleset>, game: &SubGame) -> std::result::Result<GameValue, Interrupt> {
    let key = game.key();
    if let Some(&v) = ctx.subgames.get(&key) {
        ctx.stats.subgame_cache_hits += 1;
        return Ok(v);
    }
    let sub_rules = Ruleset::from_masks(
        format!("{}/sub", rules.name()),
        rules.rows(),
        rules.cols(),
        game.squares,
        game.edges.iter().copied(),
    )
    .expect("sub-game edges lie inside the board");
    let sub_rules = Arc::new(sub_rules);
    let mut dag = Dag::new(sub_rules.clone());
    let live_before = ctx.live_nodes;
    let result = run(&mut dag, ctx, Position::new(sub_rules));
    ctx.live_nodes = live_before;
    let v = result?;
    ctx.subgames.insert(key, v);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Features;
    use crate::rulesets::{generate_mnk, generate_trunc7};

    #[test]
    fn prob_breaker_win_examples() {
        let c = Coefficients::default();
        let p = prob_breaker_win(NodeType::And, 0, 0.0, &c);
        assert!((p - (1.0 - 1.0 / (1.0 + 6.2f64.exp()))).abs() < 1e-12);
        assert!((p - 0.99797).abs() < 1e-5);
        let p = prob_breaker_win(NodeType::Or, 10, 1.0, &c);
        assert!((p - 0.99987).abs() < 1e-5);
        assert!((1.0 + 10.0 * p - 10.9987).abs() < 1e-3);
        assert!(prob_breaker_win(NodeType::Or, 0, 10.0, &c) < 1e-9);
    }

    #[test]
    fn leaf_values() {
        let mut config = Config::default();
        config.features.heuristic_pn = false;
        let rules = Arc::new(generate_mnk(1, 3, 3).unwrap());
        let mut p = Position::new(rules);
        p.set_to_move(Side::Breaker);
        // pot = 0.25
        let (pn, dn) = init_leaf_values(&p, None, None, &config).unwrap();
        assert_eq!(pn, 1.0);
        assert!((dn - 1000f64.powf(0.25)).abs() < 1e-9);
        p.set_to_move(Side::Maker);
        assert!(matches!(init_leaf_values(&p, None, None, &config), Err(Error::MissingParentInfo)));
        let (_, dn) = init_leaf_values(&p, Some(0.75), Some(0.25), &config).unwrap();
        assert!((dn - 1000f64.powf(0.75)).abs() < 1e-9);
        let plain = Config::with_features(Features::BASELINE);
        assert_eq!(init_leaf_values(&p, None, None, &plain).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn leaf_dn_at_zero_and_unit_potential() {
        let mut config = Config::default();
        config.features.heuristic_pn = false;
        let none = Arc::new(generate_mnk(1, 1, 2).unwrap());
        let mut p = Position::new(none);
        p.set_to_move(Side::Breaker);
        assert_eq!(init_leaf_values(&p, None, None, &config).unwrap().1, 1.0);
        let one = Arc::new(Ruleset::new("one", 1, 2, 2, vec![vec![Square::new(1, 1), Square::new(1, 2)]]).unwrap());
        let mut p = Position::new(one);
        p.put(0, Side::Maker);
        p.set_to_move(Side::Breaker);
        assert_eq!(p.potential(), 1.0);
        assert!((init_leaf_values(&p, None, None, &config).unwrap().1 - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn tic_tac_toe_is_maker_win() {
        let rules = Arc::new(generate_mnk(3, 3, 3).unwrap());
        for features in [Features::BASELINE, Features::ALL] {
            let r = solve(&Position::new(rules.clone()), &Config::with_features(features), Limits::NONE);
            assert_eq!(r.value, SolveValue::MakerWin);
            assert_eq!(r.stop_reason, StopReason::Solved);
        }
    }

    #[test]
    fn low_potential_is_immediate_breaker_win() {
        let rules = Arc::new(generate_mnk(1, 7, 7).unwrap());
        let mut p = Position::new(rules);
        p.set_to_move(Side::Breaker);
        let r = solve(&p, &Config::default(), Limits::NONE);
        assert_eq!(r.value, SolveValue::BreakerWin);
        assert_eq!(r.nodes_created, 1);
    }

    #[test]
    fn node_limit_reports_unknown() {
        let rules = Arc::new(generate_trunc7(8).unwrap());
        let r = solve(&Position::new(rules), &Config::with_features(Features::BASELINE), Limits::nodes(50));
        assert_eq!(r.value, SolveValue::Unknown);
        assert_eq!(r.stop_reason, StopReason::MemoryLimit);
    }

    #[test]
    fn dag_is_locally_consistent_after_solve() {
        let rules = Arc::new(generate_mnk(3, 4, 3).unwrap());
        let mut s = Search::new(Config::with_features(Features::BASELINE), Limits::NONE);
        s.solve(&Position::new(rules));
        assert_eq!(s.check_local_consistency(), Ok(()));
        assert!(s.stats().hits > 0);
    }
}
