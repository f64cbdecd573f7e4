use thiserror::Error;

/// Errors raised by the library.
///
/// Each variant maps to one failure class; the CLI and the C ABI translate
/// them into exit codes and error codes respectively.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// Malformed text or structured input.
    #[error("parse error: {0}")]
    Parse(String),

    /// Input that is well-formed but violates a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A representative array that is not in canonical form.
    #[error("not a canonical representative array: element {index} maps to {rep}")]
    NotCanonical { index: usize, rep: usize },

    /// A join directed from a class to a class that is not strictly earlier.
    #[error("join {from} -> {to} does not point to an earlier class")]
    JoinNotBackward { from: usize, to: usize },

    /// A relation failed one of the alternation or class-membership checks.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A finite relation is not an end-extension of the coding context's base approximation.
    #[error("not an end-extension: {0}")]
    NotEndExtension(String),

    /// A letter lies outside the declared alphabet.
    #[error("letter {0} is outside the alphabet")]
    LetterOutsideAlphabet(String),

    /// A construction ran past a search or size limit.
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),

    /// Arithmetic overflow in a grading or size computation.
    #[error("overflow: {0}")]
    Overflow(String),

    /// An internal invariant that the construction guarantees did not hold.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
