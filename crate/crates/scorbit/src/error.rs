//! Crate-wide error type.

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("undeclared generator `{0}`")]
    UndeclaredGenerator(String),
    #[error("invalid generator name `{0}`")]
    InvalidGeneratorName(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("word refers to symbol {index} outside an arena of size {arena}")]
    ArenaMismatch { index: usize, arena: usize },
    #[error("images do not satisfy the relators (relator {relator} fails)")]
    NotAHomomorphism { relator: usize },
    #[error("rewriting system is not certified confluent")]
    NotCertified,
    #[error("backend has no orbit decider")]
    NoOrbitDecider,
    #[error("enumeration overflowed cap {cap}")]
    Overflow { cap: usize },
    #[error("contradictory certificates at step {step}")]
    ContradictoryCertificates { step: u64 },
    #[error("generator change is inconsistent: generator {index} is not recovered")]
    InconsistentChange { index: usize },
    #[error("endomorphism is not validated")]
    UnvalidatedEndomorphism,
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("malformed formula: {0}")]
    MalformedFormula(String),
    #[error("determinant algorithms disagree: {hnf} vs {bareiss}")]
    DeterminantMismatch { hnf: String, bareiss: String },
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
