use thiserror::Error;

/// Errors raised by the geometry engine and the field analyzer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point, boundary point or set does not belong to the space it is used with.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("degenerate vertex: {0}")]
    DegenerateVertex(String),
    /// An iterative estimate did not settle; carries the last two iterates.
    #[error("no convergence (last iterates {previous} and {last})")]
    NoConvergence { previous: f64, last: f64 },
    #[error("convex set is empty")]
    EmptySet,
    #[error("composition error: {0}")]
    Composition(String),
    /// The angular circumradius is at least pi/2, so no canonical center exists.
    #[error("no unique angular circumcenter (radius {radius})")]
    NoUniqueCenter { radius: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("load error at {context}: {reason}")]
    Load { context: String, reason: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
