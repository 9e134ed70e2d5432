use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("edge ({0}, {1}) already present")]
    EdgeExists(usize, usize),

    #[error("edge ({0}, {1}) not present")]
    EdgeMissing(usize, usize),

    #[error("infeasible edge count {m} for {n} nodes: {reason}")]
    InfeasibleEdgeCount {
        n: usize,
        m: usize,
        reason: &'static str,
    },

    #[error("no connected graph found after {0} attempts")]
    ConnectivityNotAchieved(usize),

    #[error("focal node {0} has no candidates")]
    EmptyCandidates(usize),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("non-finite opinion at node {0}")]
    NonFiniteOpinion(usize),

    #[error("empty opinion state")]
    EmptyState,

    #[error("length mismatch: graph has {graph} nodes, opinion state has {opinions}")]
    LengthMismatch { graph: usize, opinions: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
