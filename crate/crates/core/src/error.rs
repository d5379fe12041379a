use thiserror::Error;

/// Errors produced by allocation, measurement and parsing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("every entity has zero votes; cannot award {0} seat(s)")]
    AllZeroVotes(u32),
    #[error("input exceeds exact-arithmetic bounds: {0}")]
    InputTooLarge(String),
    #[error("invalid rules: {0}")]
    InvalidRules(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no party passes the national threshold")]
    NoEligibleParties,
    #[error("mismatched entities: {0}")]
    MismatchedEntities(String),
    #[error("zero basis: {0}")]
    ZeroBasis(&'static str),
    #[error("singular share term: {entity} has zero votes but {seats} seat(s)")]
    SingularTerm { entity: String, seats: u32 },
    #[error("negative votes at ({constituency}, {party})")]
    NegativeVotes { constituency: String, party: String },
    #[error("infeasible seat floor: {0}")]
    InfeasibleFloor(String),
    #[error("unknown label: {0}")]
    UnknownLabel(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("ordered list construction failed: {0}")]
    ListConstruction(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
