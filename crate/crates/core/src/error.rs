use thiserror::Error;

/// A violated invariant of one of the domain types.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("instance must have at least one couple")]
    NoCouples,
    #[error(
        "valuation length must equal m: couple {couple} agent {agent} has {len} entries, m = {m}"
    )]
    ValuationLength {
        couple: usize,
        agent: usize,
        len: usize,
        m: usize,
    },
    #[error("valuation entries must be non-negative (item {item}{})", locate(*.couple, *.agent))]
    NegativeValue {
        couple: Option<usize>,
        agent: Option<usize>,
        item: usize,
    },
    #[error("binary flag set but entry is not 0 or 1 (couple {couple} agent {agent} item {item})")]
    NonBinaryEntry {
        couple: usize,
        agent: usize,
        item: usize,
    },
    #[error("binary flag is false but every entry is 0 or 1")]
    BinaryFlagMismatch,
    #[error("owner index out of range: item {item} assigned to couple {owner}, n = {n}")]
    OwnerOutOfRange { item: usize, owner: usize, n: usize },
    #[error("set family must contain at least one set")]
    EmptyFamily,
    #[error("set item out of range: set {set} contains item {item}, m = {m}")]
    SetItemOutOfRange { set: usize, item: usize, m: usize },
    #[error("set {set} lists item {item} more than once")]
    DuplicateItem { set: usize, item: usize },
    #[error("color count k must be at least 1")]
    NoColors,
    #[error("color out of range: item {item} has color {color}, k = {k}")]
    ColorOutOfRange { item: usize, color: usize, k: usize },
}

fn locate(couple: Option<usize>, agent: Option<usize>) -> String {
    match (couple, agent) {
        (Some(c), Some(a)) => format!(", couple {c} agent {a}"),
        _ => String::new(),
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("invalid color count k = {0}")]
    InvalidColorCount(usize),
    #[error("search space too large for exhaustive enumeration: {0}")]
    Infeasible(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    TheoremViolation(#[from] Box<crate::reduction::TheoremViolation>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
