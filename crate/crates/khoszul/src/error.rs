use thiserror::Error;

#[derive(Debug, Error)]
pub enum KhError {
    /// Malformed input: PD syntax, braid words, marking specs, flags.
    #[error("parse error: {0}")]
    Parse(String),
    /// Structurally invalid diagram or marking data.
    #[error("validation error: {0}")]
    Validation(String),
    /// Broken internal invariant (sign bugs, failed lifts, d^2 != 0).
    #[error("internal error: {0}")]
    Internal(String),
}
