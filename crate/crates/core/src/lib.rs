//! Maker-breaker line games on small boards: hypergraph rulesets, position
//! reductions, hypergraph decomposition and a proof number search solver.

pub mod board;
pub mod canon;
pub mod config;
pub mod decomposition;
pub mod error;
pub mod harness;
pub mod pns;
pub mod reductions;
pub mod rulesets;

pub use board::{bits, EdgeStatus, Hyperedge, Mark, Position, ResidualEdge, ResidualView, Ruleset, Side, Square, Symmetry};
pub use canon::{canonical_form, canonical_key, Key};
pub use config::{Coefficients, Config, Features, Limits, MoveOrder, BYTES_PER_NODE};
pub use decomposition::{SplitKind, SplitPlan, SubGame};
pub use error::{Error, Result};
pub use pns::{solve, NodeStatus, NodeType, Search, SearchNode, SolveResult, SolveValue, StopReason, TableStats};
pub use reductions::{legal_moves, terminal_status, GameValue, TerminalReason, TerminalStatus, TerminalValue};
pub use rulesets::{generate_mnk, generate_trunc7, verify_block_coverage, CoverageReport, Direction};
