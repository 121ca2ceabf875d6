//! Error type shared by every numerical routine in the crate.
//!
//! All failure modes are explicit: silent NaN propagation is treated as a
//! bug, so any routine that could produce a non-finite or meaningless value
//! returns a [`QError`] instead.

use thiserror::Error;

/// Crate-wide error enumeration.
#[derive(Debug, Error)]
pub enum QError {
    /// A [`QContext`](crate::qkernel::QContext) field is out of range.
    #[error("invalid context: {0}")]
    InvalidContext(String),

    /// The truncation order `product_truncation` is too small to push the
    /// q-Pochhammer tail below `tail_tol` for the requested argument.
    #[error(
        "product truncation insufficient: |w| = {modulus:.6e} needs {needed} factors, \
         context allows {available}"
    )]
    TruncationInsufficient {
        modulus: f64,
        needed: usize,
        available: usize,
    },

    /// A q-Pochhammer symbol in a denominator vanished (a factor hit zero).
    #[error("pole: q-Pochhammer denominator vanished at factor index {index}")]
    PochhammerPole { index: usize },

    /// A series argument lies outside its convergence domain.
    #[error("divergent domain: {0}")]
    DivergentDomain(String),

    /// The gamma function was evaluated at (or numerically on top of) a
    /// non-positive integer.
    #[error("gamma pole near z = {re} + {im}i")]
    GammaPole { re: f64, im: f64 },

    /// An integrand produced a non-finite value at a quadrature node.
    #[error("non-finite integrand value at quadrature node {node}")]
    NonFiniteIntegrand { node: usize },

    /// A bilateral charge sum failed to meet its tail certificate.
    #[error("bilateral sum tail still above tolerance at |m| = {m_max}")]
    TailNotConverged { m_max: i64 },

    /// A pole of the integrand sits too close to the unit contour.
    #[error(
        "pole too close to the contour: clearance {clearance:.3e} < {threshold:.3e} \
         (flavor {flavor}, charge {m}, level {level})"
    )]
    PoleOnContour {
        clearance: f64,
        threshold: f64,
        flavor: usize,
        m: i64,
        level: usize,
    },

    /// Balanced parameter generation could not satisfy its constraints.
    #[error("parameter generation failed: {0}")]
    Generation(String),

    /// A checker precondition (balancing, crossing constraint, ...) failed.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A one-time convention calibration found no candidate below tolerance.
    #[error("calibration failed: {0}")]
    Calibration(String),

    /// A long-running checker exceeded its wall-clock budget.
    #[error("runtime budget exceeded after {elapsed_ms} ms: {context}")]
    BudgetExceeded { elapsed_ms: u128, context: String },

    /// I/O or serialization failure while writing a report.
    #[error("report error: {0}")]
    Report(String),
}

/// Convenience alias used throughout the crate.
pub type QResult<T> = Result<T, QError>;
