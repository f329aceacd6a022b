//! Error type shared by every module in this crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A matrix argument is unusable: wrong emptiness, NaN/inf entries, or an
    /// out-of-range tolerance.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Operand dimensions do not line up for the requested product or solve.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A solver that is only valid under a structural assumption was called on
    /// data that violates it. `residual` is the relative violation magnitude.
    #[error("assumption `{assumption}` violated (relative residual {residual:.3e})")]
    AssumptionViolated { assumption: String, residual: f64 },

    /// The exact-representation constraint A = BXC has no solution.
    #[error("constraint infeasible (relative residual {residual:.3e})")]
    Infeasible { residual: f64 },

    /// No closed-form rule is shipped for this loss/regularizer pairing.
    #[error("unsupported loss/regularizer pair: loss={loss}, reg={reg}")]
    UnsupportedPair { loss: String, reg: String },

    /// A configuration value is out of its documented range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A data or config file failed to parse. `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// An iterative kernel (SVD or eigensolver) did not converge.
    #[error("numerical factorization failed: {0}")]
    Factorization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
