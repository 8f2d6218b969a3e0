use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty graph: all edge weights are zero")]
    EmptyGraph,
    #[error("degenerate subset: zero volume")]
    DegenerateSubset,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("model probability matrix is rank deficient (smallest |eigenvalue| {0:e})")]
    RankDeficient(f64),
    #[error("isolated class {0}: zero expected degree")]
    IsolatedClass(usize),
    #[error("M_D requires irreducible A: graph is disconnected")]
    Disconnected,
    #[error("vertex {0} has zero degree")]
    ZeroDegree(usize),
    #[error("enumeration size {size} exceeds cap {cap}; {hint}")]
    CapExceeded { size: usize, cap: usize, hint: &'static str },
    #[error("work budget exceeded: estimated {estimate:e} > budget {budget:e}")]
    BudgetExceeded { estimate: f64, budget: f64 },
    #[error("empty cluster after {0} membership draws: resample or use fixed_sizes")]
    EmptyCluster(usize),
    #[error("pattern too large: {0} vertices (max {1})")]
    PatternTooLarge(usize, usize),
    #[error("graph must be simple (0/1 weights) for this operation")]
    NotSimple,
    #[error("k = {k} exceeds the {distinct} distinct points")]
    TooFewPoints { k: usize, distinct: usize },
    #[error("no k-structure at this delta: {found} structural eigenvalues, expected {expected}")]
    NoStructure { found: usize, expected: usize },
    #[error("eigensolver failed to converge")]
    NoConvergence,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
