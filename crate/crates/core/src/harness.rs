//! Experiment drivers: ablation tables, support-set balance, scaling runs
//! and discovery of a breaker-win handicap start.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::board::{bits, Position, Ruleset, Side};
use crate::canon::canonical_key;
use crate::config::{Config, Features, Limits};
use crate::error::{Error, Result};
use crate::pns::{Search, SolveResult, SolveValue, StopReason};
use crate::reductions::TerminalValue;
use crate::rulesets::{generate_mnk, generate_trunc7};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum RulesSpec {
    Mnk { m: usize, n: usize, k: usize },
    Trunc7 { n: usize },
}

impl RulesSpec {
    pub fn build(&self) -> Result<Arc<Ruleset>> {
        Ok(Arc::new(match *self {
            RulesSpec::Mnk { m, n, k } => generate_mnk(m, n, k)?,
            RulesSpec::Trunc7 { n } => generate_trunc7(n)?,
        }))
    }

    pub fn n(&self) -> usize {
        match *self {
            RulesSpec::Mnk { n, .. } | RulesSpec::Trunc7 { n } => n,
        }
    }

    pub fn with_n(&self, n: usize) -> Self {
        match *self {
            RulesSpec::Mnk { m, k, .. } => RulesSpec::Mnk { m, n, k },
            RulesSpec::Trunc7 { .. } => RulesSpec::Trunc7 { n },
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            RulesSpec::Mnk { .. } => "mnk",
            RulesSpec::Trunc7 { .. } => "trunc7",
        }
    }
}

/// Starting position of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Setup {
    /// Empty board, maker to move.
    Proof,
    /// The handicap start stored by [`find_disproof_setup`] for this board.
    Disproof,
    File(PathBuf),
}

impl FromStr for Setup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proof" => Ok(Setup::Proof),
            "disproof" => Ok(Setup::Disproof),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(Setup::File(PathBuf::from(p))),
                _ => Err(Error::Parse(format!("setup must be proof, disproof or file:<path>, got {s:?}"))),
            },
        }
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setup::Proof => f.write_str("proof"),
            Setup::Disproof => f.write_str("disproof"),
            Setup::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Where the disproof start of a board is kept.
pub fn disproof_path(dir: &Path, rules: &RulesSpec) -> PathBuf {
    let name = match *rules {
        RulesSpec::Mnk { m, n, k } => format!("disproof-mnk-{m}x{n}-{k}.txt"),
        RulesSpec::Trunc7 { n } => format!("disproof-trunc7-{n}.txt"),
    };
    dir.join(name)
}

pub fn load_position(rules: Arc<Ruleset>, path: &Path) -> Result<Position> {
    Position::parse(rules, &std::fs::read_to_string(path)?)
}

pub fn setup_position(rules_spec: &RulesSpec, setup: &Setup, setup_dir: &Path) -> Result<Position> {
    let rules = rules_spec.build()?;
    match setup {
        Setup::Proof => Ok(Position::new(rules)),
        Setup::Disproof => {
            let path = disproof_path(setup_dir, rules_spec);
            if !path.exists() {
                return Err(Error::Parse(format!(
                    "no disproof start at {}; run find-disproof first",
                    path.display()
                )));
            }
            load_position(rules, &path)
        }
        Setup::File(p) => load_position(rules, p),
    }
}

/// One solve, as written to the results JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub ruleset: String,
    pub n: usize,
    pub setup: String,
    pub flags: Features,
    pub value: SolveValue,
    pub nodes: u64,
    pub seconds: f64,
    pub stop: String,
}

impl RunRecord {
    pub fn new(rules: &RulesSpec, setup: &Setup, config: &Config, r: &SolveResult) -> Self {
        RunRecord {
            ruleset: rules.family().to_string(),
            n: rules.n(),
            setup: setup.to_string(),
            flags: config.features,
            value: r.value,
            nodes: r.nodes_created,
            seconds: r.elapsed.as_secs_f64(),
            stop: stop_name(r.stop_reason).to_string(),
        }
    }
}

pub fn stop_name(s: StopReason) -> &'static str {
    match s {
        StopReason::Solved => "solved",
        StopReason::TimeLimit => "time",
        StopReason::MemoryLimit => "memory",
    }
}

pub fn value_name(v: SolveValue) -> &'static str {
    match v {
        SolveValue::MakerWin => "maker_win",
        SolveValue::BreakerWin => "breaker_win",
        SolveValue::Unknown => "unknown",
    }
}

/// A flag matrix over a range of board sizes.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub rules: RulesSpec,
    pub ns: Vec<usize>,
    pub setup: Setup,
    pub setup_dir: PathBuf,
    /// Named configurations; the first is the reference for ratios.
    pub configs: Vec<(String, Config)>,
    pub limits: Limits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub config: String,
    pub n: usize,
    pub setup: String,
    pub value: SolveValue,
    pub nodes: u64,
    pub seconds: f64,
    pub limited: bool,
}

impl ExperimentRow {
    /// Size relative to a reference row; a limited run gives a lower bound.
    pub fn size_ratio(&self, reference: &ExperimentRow) -> f64 {
        self.nodes as f64 / reference.nodes.max(1) as f64
    }

    pub fn time_ratio(&self, reference: &ExperimentRow) -> f64 {
        self.seconds / reference.seconds.max(1e-9)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentReport {
    pub fn reference(&self, n: usize) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn row(&self, config: &str, n: usize) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.n == n && r.config == config)
    }

    /// CSV with columns `config,n,setup,value,nodes,seconds,limited`.
    pub fn write_csv<W: std::io::Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["config", "n", "setup", "value", "nodes", "seconds", "limited"])
            .map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([
                r.config.clone(),
                r.n.to_string(),
                r.setup.clone(),
                value_name(r.value).to_string(),
                r.nodes.to_string(),
                format!("{:.6}", r.seconds),
                r.limited.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Plain-text table of time and size ratios against the first
    /// configuration; `*` marks runs stopped by a limit.
    pub fn ratio_table(&self) -> String {
        let mut ns: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        ns.dedup();
        let mut names: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.config.as_str()) {
                names.push(&r.config);
            }
        }
        let mut out = format!("{:<20}", "config");
        for n in &ns {
            out.push_str(&format!(" | n={n:<3} time     size"));
        }
        out.push('\n');
        for name in names {
            out.push_str(&format!("{name:<20}"));
            for &n in &ns {
                let cell = match (self.row(name, n), self.reference(n)) {
                    (Some(r), Some(base)) if !r.limited && !base.limited => {
                        format!(" | {:>8.2} {:>11.2}", r.time_ratio(base), r.size_ratio(base))
                    }
                    (Some(_), _) => format!(" | {:>8} {:>11}", "*", "*"),
                    (None, _) => format!(" | {:>8} {:>11}", "-", "-"),
                };
                out.push_str(&cell);
            }
            out.push('\n');
        }
        out
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let mut rows = Vec::new();
    for &n in &spec.ns {
        let rules = spec.rules.with_n(n);
        let pos = setup_position(&rules, &spec.setup, &spec.setup_dir)?;
        for (name, config) in &spec.configs {
            config.validate()?;
            let r = Search::new(config.clone(), spec.limits).solve(&pos);
            rows.push(ExperimentRow {
                config: name.clone(),
                n,
                setup: spec.setup.to_string(),
                value: r.value,
                nodes: r.nodes_created,
                seconds: r.elapsed.as_secs_f64(),
                limited: r.stop_reason != StopReason::Solved,
            });
        }
    }
    Ok(ExperimentReport { rows })
}

/// The remove-one configurations around a full configuration.
pub fn ablation_configs(full: &Config) -> Vec<(String, Config)> {
    let f = full.features;
    let with = |name: &str, features: Features| {
        let mut c = full.clone();
        c.features = features;
        (name.to_string(), c)
    };
    vec![
        with("all", f),
        with("no_components", Features { components: false, ..f }),
        with("no_breaker_stop", Features { breaker_stop: false, ..f }),
        with("no_dead_squares", Features { dead_squares: false, ..f }),
        with("no_dominated", Features { dominated: false, ..f }),
        with("no_forced_move", Features { forced_move: false, ..f }),
        with("no_heuristics", Features { heuristic_pn: false, heuristic_dn: false, ..f }),
    ]
}

/// Single-technique configurations on top of the baseline.
pub fn technique_configs(base: &Config) -> Vec<(String, Config)> {
    let b = Features::BASELINE;
    let with = |name: &str, features: Features| {
        let mut c = base.clone();
        c.features = features;
        (name.to_string(), c)
    };
    vec![
        with("baseline", b),
        with("forced_move", Features { forced_move: true, ..b }),
        with("dead_squares", Features { dead_squares: true, ..b }),
        with("dominated", Features { dominated: true, ..b }),
        with("breaker_stop", Features { breaker_stop: true, ..b }),
        with("heuristics", Features { heuristic_pn: true, heuristic_dn: true, ..b }),
        with("components", Features { components: true, dead_squares: true, ..b }),
        with("isomorphy", Features { isomorphy: true, ..b }),
    ]
}

/// AND positions reachable from the root through OR positions only: the
/// root's children, plus children of children that became maker-to-move
/// again through simplification.
pub fn support_positions(root: &Position, config: &Config) -> Vec<Position> {
    let search = Search::new(config.clone(), Limits::NONE);
    let (root, _) = search.normalized(root);
    let mut out = Vec::new();
    if root.to_move() != Side::Maker {
        return out;
    }
    let mut seen = FxHashSet::default();
    seen.insert(canonical_key(&root, config));
    let mut stack = vec![root];
    while let Some(pos) = stack.pop() {
        for (_, child, _) in search.successors(&pos) {
            let key = canonical_key(&child, config);
            if !seen.insert(key) {
                continue;
            }
            if child.to_move() == Side::Maker {
                stack.push(child);
            } else {
                out.push(child);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub support_size: usize,
    pub maker_wins: usize,
    pub breaker_wins: usize,
    pub unknown: usize,
    /// Breaker wins over solved members.
    pub breaker_fraction: f64,
    /// Bounds on the fraction if every unknown went either way.
    pub fraction_bounds: (f64, f64),
}

/// Solves every support member under `limits` (in parallel) and reports
/// the breaker-win balance.
pub fn support_set(root: &Position, config: &Config, limits: Limits) -> SupportReport {
    let members = support_positions(root, config);
    let values: Vec<SolveValue> = members
        .par_iter()
        .map(|p| {
            let t = crate::reductions::terminal_status_with(p, config.features.breaker_stop);
            match t.value {
                TerminalValue::MakerWin if config.features.forced_move => SolveValue::MakerWin,
                _ => Search::new(config.clone(), limits).solve(p).value,
            }
        })
        .collect();
    let maker_wins = values.iter().filter(|v| **v == SolveValue::MakerWin).count();
    let breaker_wins = values.iter().filter(|v| **v == SolveValue::BreakerWin).count();
    let unknown = values.len() - maker_wins - breaker_wins;
    let size = values.len().max(1) as f64;
    SupportReport {
        support_size: values.len(),
        maker_wins,
        breaker_wins,
        unknown,
        breaker_fraction: breaker_wins as f64 / (maker_wins + breaker_wins).max(1) as f64,
        fraction_bounds: (breaker_wins as f64 / size, (breaker_wins + unknown) as f64 / size),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub seconds: f64,
    pub nodes: u64,
    pub value: SolveValue,
    pub limited: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Least-squares fit of ln(nodes) against n over solved rows.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl ScalingReport {
    /// CSV with columns `n,seconds,nodes`.
    pub fn write_csv<W: std::io::Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(["n", "seconds", "nodes"]).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record([r.n.to_string(), format!("{:.6}", r.seconds), r.nodes.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(slope, intercept, r^2)` of the least-squares line through the points.
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let k = points.len() as f64;
    if points.len() < 2 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

pub fn scaling_study(
    rules: &RulesSpec,
    ns: std::ops::RangeInclusive<usize>,
    setup: &Setup,
    setup_dir: &Path,
    config: &Config,
    limits: Limits,
) -> Result<ScalingReport> {
    let mut rows = Vec::new();
    for n in ns {
        let pos = setup_position(&rules.with_n(n), setup, setup_dir)?;
        let r = Search::new(config.clone(), limits).solve(&pos);
        rows.push(ScalingRow {
            n,
            seconds: r.elapsed.as_secs_f64(),
            nodes: r.nodes_created,
            value: r.value,
            limited: r.stop_reason != StopReason::Solved,
        });
    }
    let points: Vec<(f64, f64)> =
        rows.iter().filter(|r| !r.limited).map(|r| (r.n as f64, (r.nodes as f64).ln())).collect();
    let (slope, intercept, r_squared) = fit_line(&points);
    Ok(ScalingReport { rows, slope, intercept, r_squared })
}

/// Outcome of [`find_disproof_setup`].
#[derive(Clone, Debug)]
pub struct DisproofSetup {
    pub position: Position,
    pub result: SolveResult,
    pub path: PathBuf,
    /// Candidates solved before this one was found.
    pub tried: usize,
}

/// Candidate handicap starts: two maker stones and one breaker stone with
/// `to_move` to move, one per mirror pair, lowest potential first.
pub fn disproof_candidates(rules: &Arc<Ruleset>, to_move: Side) -> Vec<Position> {
    let squares: Vec<usize> = bits(rules.vertex_mask()).collect();
    let mut seen = FxHashSet::default();
    let mut out = Vec::new();
    for (i, &a) in squares.iter().enumerate() {
        for &b in &squares[i + 1..] {
            let maker = (1u64 << a) | (1u64 << b);
            for &c in &squares {
                let breaker = 1u64 << c;
                if maker & breaker != 0 {
                    continue;
                }
                let mirrored = (rules.mirror_mask(maker), rules.mirror_mask(breaker));
                if !seen.insert((maker, breaker).min(mirrored)) {
                    continue;
                }
                let p = Position::from_marks(rules.clone(), maker, breaker, to_move)
                    .expect("distinct in-bounds squares");
                out.push(p);
            }
        }
    }
    out.sort_by(|x, y| x.potential().total_cmp(&y.potential()));
    out
}

/// Solves handicap starts in order of increasing potential, each under
/// `per_candidate`, until one is a breaker win or `total` runs out. Starts
/// with maker to move are tried first, then those with breaker to move
/// (the side due after two maker and one breaker stone). The winner is
/// written to [`disproof_path`] under `dir`.
pub fn find_disproof_setup(
    rules_spec: &RulesSpec,
    config: &Config,
    per_candidate: Limits,
    total: Duration,
    dir: &Path,
) -> Result<DisproofSetup> {
    let rules = rules_spec.build()?;
    let start = std::time::Instant::now();
    let candidates = disproof_candidates(&rules, Side::Maker)
        .into_iter()
        .chain(disproof_candidates(&rules, Side::Breaker));
    for (tried, p) in candidates.enumerate() {
        let left = total.saturating_sub(start.elapsed());
        if left.is_zero() {
            break;
        }
        let limits = Limits { time: Some(per_candidate.time.map_or(left, |t| t.min(left))), ..per_candidate };
        let result = Search::new(config.clone(), limits).solve(&p);
        if result.value == SolveValue::BreakerWin {
            std::fs::create_dir_all(dir)?;
            let path = disproof_path(dir, rules_spec);
            std::fs::write(&path, p.to_text())?;
            return Ok(DisproofSetup { position: p, result, path, tried });
        }
    }
    Err(Error::BudgetExhausted(format!("no breaker-win start found within {:.0?}", total)))
}

/// Potentials along the principal line of a finished or interrupted
/// search, starting at the root.
pub fn potential_trace(search: &Search) -> Vec<(Side, f64)> {
    search.principal_line().iter().map(|p| (p.to_move(), p.potential())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setup_parsing() {
        assert_eq!("proof".parse::<Setup>().unwrap(), Setup::Proof);
        assert_eq!("file:a/b.txt".parse::<Setup>().unwrap(), Setup::File("a/b.txt".into()));
        assert!("file:".parse::<Setup>().is_err());
        assert!("other".parse::<Setup>().is_err());
        assert_eq!(Setup::File("x".into()).to_string(), "file:x");
    }

    #[test]
    fn line_fit() {
        let (s, i, r2) = fit_line(&[(1.0, 3.0), (2.0, 5.0), (3.0, 7.0)]);
        assert!((s - 2.0).abs() < 1e-12 && (i - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        let (_, _, r2) = fit_line(&[(1.0, 1.0), (2.0, 3.0), (3.0, 2.0)]);
        assert!(r2 < 0.5);
    }

    #[test]
    fn candidates_are_mirror_distinct() {
        let rules = generate_trunc7(7).map(Arc::new).unwrap();
        let c = disproof_candidates(&rules, Side::Maker);
        // 28 choose 2 times 26, halved up to mirror-fixed starts
        let all = 28 * 27 / 2 * 26;
        assert!(c.len() > all / 2 && c.len() < all);
        for p in &c {
            assert_eq!((p.maker_mask().count_ones(), p.breaker_mask().count_ones()), (2, 1));
            assert_eq!(p.to_move(), Side::Maker);
        }
        assert!(c.windows(2).all(|w| w[0].potential() <= w[1].potential()));
    }

    #[test]
    fn missing_disproof_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let r = setup_position(&RulesSpec::Trunc7 { n: 7 }, &Setup::Disproof, dir.path());
        assert!(r.is_err());
    }

    #[test]
    fn support_of_tic_tac_toe() {
        let rules = generate_mnk(3, 3, 3).map(Arc::new).unwrap();
        let config = Config::with_features(Features::BASELINE);
        // corner, top/bottom edge, left/right edge, centre under the
        // mirror, flip and half-turn symmetries
        let s = support_positions(&Position::new(rules), &config);
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|p| p.to_move() == Side::Breaker));
    }
}
