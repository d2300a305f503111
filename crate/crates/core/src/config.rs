//! Search configuration: feature toggles, heuristic parameters and limits.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Features {
    pub forced_move: bool,
    pub dead_squares: bool,
    pub dominated: bool,
    pub breaker_stop: bool,
    pub components: bool,
    pub isomorphy: bool,
    /// Collapse board symmetries in the transposition table.
    pub symmetry: bool,
    pub heuristic_pn: bool,
    pub heuristic_dn: bool,
    /// Scale the proof number of an undecided breaker-to-move leaf by its
    /// number of candidate replies.
    pub mobility: bool,
}

impl Features {
    /// Plain PNS with a symmetry-aware transposition table.
    pub const BASELINE: Features = Features {
        forced_move: false,
        dead_squares: false,
        dominated: false,
        breaker_stop: false,
        components: false,
        isomorphy: false,
        symmetry: true,
        heuristic_pn: false,
        heuristic_dn: false,
        mobility: false,
    };

    /// Everything except isomorphy.
    pub const ALL: Features = Features {
        forced_move: true,
        dead_squares: true,
        dominated: true,
        breaker_stop: true,
        components: true,
        isomorphy: false,
        symmetry: true,
        heuristic_pn: true,
        heuristic_dn: true,
        mobility: true,
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveOrder {
    RowMajor,
    Contribution,
}

/// Logistic model for the breaker-win probability of a leaf.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub c0: f64,
    #[serde(rename = "c_nodeT")]
    pub c_node_type: f64,
    #[serde(rename = "c_emptyS")]
    pub c_empty: f64,
    pub c_pot: f64,
}

impl Default for Coefficients {
    fn default() -> Self {
        Coefficients { c0: -6.2, c_node_type: -13.4, c_empty: -1.52, c_pot: 25.83 }
    }
}

impl Coefficients {
    /// Reads `{"c0":..,"c_nodeT":..,"c_emptyS":..,"c_pot":..}`.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let c: Coefficients = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if [c.c0, c.c_node_type, c.c_empty, c.c_pot].iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRuleset("non-finite coefficient".into()));
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub features: Features,
    pub alpha: f64,
    pub beta: f64,
    pub coefficients: Coefficients,
    pub order: MoveOrder,
}

impl Default for Config {
    fn default() -> Self {
        Config::with_features(Features::ALL)
    }
}

impl Config {
    pub fn with_features(features: Features) -> Self {
        Config {
            features,
            alpha: 1000.0,
            beta: 10.0,
            coefficients: Coefficients::default(),
            order: MoveOrder::RowMajor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0) || !(self.beta >= 0.0) {
            return Err(Error::InvalidRuleset(format!(
                "alpha must exceed 1 and beta be non-negative (alpha={}, beta={})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

/// Per-solve resource limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    pub time: Option<Duration>,
    /// Upper bound on search nodes held in memory.
    pub max_nodes: Option<u64>,
}

/// Rough bytes per search node (node record, child and parent links, table
/// entry), used to turn a byte budget into a node budget.
pub const BYTES_PER_NODE: u64 = 80;

impl Limits {
    pub const NONE: Limits = Limits { time: None, max_nodes: None };

    pub fn new(time: Option<Duration>, memory_bytes: Option<u64>) -> Self {
        Limits { time, max_nodes: memory_bytes.map(|b| (b / BYTES_PER_NODE).max(1)) }
    }

    /// Desk-scale defaults: 10 minutes, 8 GB.
    pub fn desk() -> Self {
        Limits::new(Some(Duration::from_secs(600)), Some(8 << 30))
    }

    pub fn nodes(max_nodes: u64) -> Self {
        Limits { time: None, max_nodes: Some(max_nodes) }
    }
}
