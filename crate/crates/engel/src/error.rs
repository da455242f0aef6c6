//! Crate-wide error type.
//!
//! Errors split into usage errors (bad input: unparseable expressions,
//! unbound symbols, inconsistent bindings) and internal invariant
//! violations. Symbol-table mismatches in arithmetic operators panic
//! instead: mixing tables is a programming error, and all user input
//! paths validate tables at the boundary.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("invalid symbol table: {0}")]
    BadSymbolTable(String),

    #[error("invalid binding: {0}")]
    InvalidBinding(String),

    #[error("symbol `{0}` is unbound")]
    UnboundSymbol(String),

    #[error("symbol `{0}` requires a real value")]
    NonRealValue(String),

    #[error("circle symbols require the rational parameter t")]
    MissingCircleParameter,

    #[error("matrix determinant is not an invertible constant")]
    NonConstantDeterminant,

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("coframe transform error: {0}")]
    Transform(String),

    #[error("realification produced a non-real coefficient: {0}")]
    NonRealStructure(String),

    #[error("chart is degenerate: {0}")]
    DegenerateChart(String),

    #[error("chart check error: {0}")]
    Chart(String),

    #[error("lattice certificate error: {0}")]
    Lattice(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
