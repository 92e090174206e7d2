use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed table input. `row` and `column` are 1-based positions in
    /// the source document; `column` is absent for row-level problems.
    #[error("parse error at row {row}{}: {message}", .column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        row: usize,
        column: Option<usize>,
        message: String,
    },

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A row or column total is zero, so expected counts vanish.
    #[error("degenerate margin: {0}")]
    DegenerateMargin(String),

    /// The operation needs a different table shape (e.g. bands on non-2x2).
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),

    /// A sampler could not produce a draw within its budget.
    #[error("sampling aborted: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
