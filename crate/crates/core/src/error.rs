//! Crate-wide error type. Variants carry enough of a certificate to point at
//! the offending elements, cells or matrices.

use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Error)]
pub enum Error {
    /// `solve_in_span`: the target has a column outside the span of the basis.
    #[error("no solution: target is not contained in the span of the basis")]
    NoSolution,

    /// Relation closure produced `x <= y` and `y <= x` for distinct `x`, `y`.
    #[error("cycle detected through {0}")]
    CycleDetected(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A would-be monotone assignment maps a related pair to an unrelated pair.
    #[error("not monotone: {lower} <= {upper} but {lower_image} !<= {upper_image}")]
    NotMonotone {
        lower: String,
        upper: String,
        lower_image: String,
        upper_image: String,
    },

    /// Two cover paths from `from` to `to` compose to different matrices.
    /// Boxed so the error stays small on every `Result` in the crate.
    #[error("structure maps do not commute between {from} and {to}")]
    NotCommutative {
        from: String,
        to: String,
        left: Box<Matrix>,
        right: Box<Matrix>,
    },

    #[error("not an interval: {0}")]
    NotInterval(String),

    /// The set fails the fixed-point test that characterizes differences of
    /// closed staircase upsets.
    #[error("not in the closed staircase class: {0}")]
    NotClosedClass(String),

    #[error("unknown element {0}")]
    UnknownElement(String),

    /// Cross-check between the encoded pipeline and a direct sample-grid
    /// computation disagreed.
    #[error("crosscheck mismatch: {0}")]
    Mismatch(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
