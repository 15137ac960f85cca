use crate::engine::Coord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid rule: {0}")]
    InvalidRule(String),
    #[error("invalid configuration: state {state} at {cell} is not below q = {q}")]
    InvalidConfiguration { cell: Coord, state: u32, q: u32 },
    #[error("fairness violation: cell {0} is never scheduled")]
    FairnessViolation(Coord),
    #[error("ineligible rule: {0}")]
    Ineligible(String),
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("node {0} is not applicable")]
    NotApplicable(usize),
    #[error("invariance violation at cell {cell}: {first:?} vs {second:?}")]
    InvarianceViolation { cell: Coord, first: Vec<u32>, second: Vec<u32> },
    #[error("routing failed on net {0}")]
    Routing(String),
    #[error("netlist is cyclic")]
    Cyclic,
    #[error("step budget of {0} exhausted")]
    Timeout(u64),
    #[error("circuit integrity: {0}")]
    Integrity(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, col, msg: msg.into() }
    }
}
