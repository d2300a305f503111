use thiserror::Error;

use crate::board::Square;

#[derive(Debug, Error)]
pub enum Error {
    #[error("square {0} is already marked")]
    Occupied(Square),
    #[error("square {0} is outside the board")]
    OutOfBounds(Square),
    #[error("invalid ruleset: {0}")]
    InvalidRuleset(String),
    #[error("invalid position text: {0}")]
    Parse(String),
    #[error("heuristic dn for an OR leaf needs the parent and minimum sibling potential")]
    MissingParentInfo,
    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
