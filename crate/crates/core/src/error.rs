//! Shared error type for all modules.

use thiserror::Error;

/// Everything that can go wrong across the library.
///
/// Each variant carries a human-readable payload naming the offending
/// object; callers that need machine-readable detail should match on the
/// variant, not the string.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Paths or arrows whose endpoints do not match.
    #[error("non-composable: {0}")]
    NonComposable(String),
    /// A search or enumeration could not certify its answer within the
    /// caller-supplied bound.
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
    /// A point outside the domain of the partial map in play.
    #[error("not in domain: {0}")]
    NotInDomain(String),
    /// A triple (x, n, y) that is not an arrow of the groupoid.
    #[error("not in groupoid: {0}")]
    NotInGroupoid(String),
    /// An operation restricted to acyclic graphs met a cycle.
    #[error("cyclic graph: {0}")]
    CyclicGraph(String),
    /// A chart index that does not cover the point it was paired with.
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    /// Cover/cocycle data violating one of its defining identities.
    #[error("invalid cocycle: {0}")]
    InvalidCocycle(String),
    /// Two objects built over different graphs, systems, or cocycles.
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    /// A base function outside the class an operation supports.
    #[error("unsupported function: {0}")]
    UnsupportedFunction(String),
    /// A function whose support escapes the set an operation requires.
    #[error("unsupported support: {0}")]
    UnsupportedSupport(String),
    /// A sequence presentation outside the two supported tail schemas.
    #[error("unsupported presentation: {0}")]
    UnsupportedPresentation(String),
    /// A factor map failing the regularity criteria.
    #[error("not regular: {0}")]
    NotRegular(String),
    /// Structurally malformed graph or system data.
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    /// Malformed instance file or value syntax.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
