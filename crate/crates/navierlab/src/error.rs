//! Crate-wide error type.
//!
//! Every failure carries enough context to be printed as a one-line
//! diagnostic; the CLI maps hard errors to exit status 2 and scientific
//! failures (non-convergence, failed expectations) to exit status 1.

use std::fmt;

#[derive(Debug)]
pub enum Error {
    /// Shift vector must contain at least one entry.
    EmptyAlpha,
    /// Shift entries must be finite.
    NonFiniteAlpha { index: usize },
    /// Coefficient index k must satisfy k <= m.
    IndexOutOfRange { index: usize, max: usize },
    /// Domain failed structural validation and is not a flagged negative control.
    InvalidDomain { failures: String },
    /// Grid has too few interior nodes to carry a five-point operator.
    GridTooCoarse { interior: usize },
    /// Reflection plane offset is not an integer multiple of h/2.
    LambdaOffLattice { lambda: f64, spacing: f64 },
    /// Reflection plane offset must lie in [0, 1).
    LambdaOutOfRange { lambda: f64 },
    /// Operator shifts must be nonnegative to keep the M-matrix structure.
    NegativeShift { value: f64 },
    /// Vector length does not match the operator dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// Conjugate gradients hit the iteration cap before the residual target.
    CgNoConvergence { iterations: usize, relative_residual: f64 },
    /// The quadratic form turned non-positive; the operator is not SPD.
    LinearSolveBreakdown { iteration: usize },
    /// Picard iteration hit the iteration cap before the update target.
    PicardNoConvergence { iterations: usize, last_update: f64 },
    /// A cap node reflects to a node outside the domain on a grid that was
    /// expected to contain every reflection.
    ReflectionOutsideDomain { node: (i32, i32), lambda: f64 },
    /// Observed slope of the nonlinearity escaped [0, L] beyond rounding slack.
    CouplingOutOfBounds { value: f64, lipschitz: f64 },
    /// Scalar argument violated its documented constraint.
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    /// Operation needs a grid built from a specific shape.
    UnsupportedDomain { reason: String },
    /// Nonlinearity violated an admissibility clause; the message names it.
    HypothesisViolated { clause: String },
    /// Malformed configuration file; line numbers are 1-based and 0 marks
    /// file-level problems (e.g. a missing required key).
    Config { line: usize, message: String },
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyAlpha => write!(f, "shift vector is empty"),
            Error::NonFiniteAlpha { index } => {
                write!(f, "shift entry {} is not finite", index)
            }
            Error::IndexOutOfRange { index, max } => {
                write!(f, "coefficient index {} out of range 0..={}", index, max)
            }
            Error::InvalidDomain { failures } => {
                write!(f, "domain rejected by structural validation: {}", failures)
            }
            Error::GridTooCoarse { interior } => {
                write!(f, "grid has only {} interior nodes (need at least 4)", interior)
            }
            Error::LambdaOffLattice { lambda, spacing } => write!(
                f,
                "lambda = {} is not an integer multiple of h/2 = {}",
                lambda,
                spacing / 2.0
            ),
            Error::LambdaOutOfRange { lambda } => {
                write!(f, "lambda = {} outside the sweep range [0, 1)", lambda)
            }
            Error::NegativeShift { value } => {
                write!(f, "operator shift {} is negative", value)
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {}, got {}", expected, got)
            }
            Error::CgNoConvergence {
                iterations,
                relative_residual,
            } => write!(
                f,
                "conjugate gradients stalled after {} iterations (relative residual {:e})",
                iterations, relative_residual
            ),
            Error::LinearSolveBreakdown { iteration } => write!(
                f,
                "conjugate gradients broke down at iteration {} (operator not SPD?)",
                iteration
            ),
            Error::PicardNoConvergence {
                iterations,
                last_update,
            } => write!(
                f,
                "picard iteration did not converge in {} steps (last update {:e})",
                iterations, last_update
            ),
            Error::ReflectionOutsideDomain { node, lambda } => write!(
                f,
                "cap node ({}, {}) reflects outside the domain at lambda = {}",
                node.0, node.1, lambda
            ),
            Error::CouplingOutOfBounds { value, lipschitz } => write!(
                f,
                "observed slope {} escapes [0, {}] beyond rounding slack",
                value, lipschitz
            ),
            Error::InvalidParameter {
                name,
                value,
                constraint,
            } => write!(f, "parameter {} = {} violates {}", name, value, constraint),
            Error::UnsupportedDomain { reason } => write!(f, "unsupported domain: {}", reason),
            Error::HypothesisViolated { clause } => {
                write!(f, "hypothesis violated: {}", clause)
            }
            Error::Config { line: 0, message } => write!(f, "config error: {}", message),
            Error::Config { line, message } => {
                write!(f, "config error at line {}: {}", line, message)
            }
            Error::Io(e) => write!(f, "io error: {}", e),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
