//! Crate-wide error type.

/// Errors produced by the estimation, PSD, enumeration, and sampling APIs.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A sample was NaN or infinite where a finite value is required.
    #[error("non-finite sample at position {position}")]
    NonFiniteSample { position: usize },

    /// An operation that needs at least one sample got an empty input.
    #[error("input must contain at least one sample")]
    EmptyInput,

    /// A sign slice contained a value other than +1 or -1.
    #[error("invalid sign value {value} at position {position} (must be +1 or -1)")]
    InvalidSign { value: i8, position: usize },

    /// Two sequences that must share a sample count do not.
    #[error("sample count mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A pattern string contained a character other than '+'/'-' (or a
    /// malformed quadrant pair in the complex case).
    #[error("invalid sign pattern {pattern:?}: {reason}")]
    InvalidPattern { pattern: String, reason: String },

    /// A matrix dimension was out of the supported range for the operation.
    #[error("unsupported dimension p = {p}: {reason}")]
    InvalidDimension { p: usize, reason: String },

    /// Matrix entries violate the Hermitian/symmetric contract beyond 1e-12.
    #[error(
        "matrix is not Hermitian: |m[{i}][{j}] - conj(m[{j}][{i}])| = {defect:.3e} exceeds 1e-12"
    )]
    NotHermitian { i: usize, j: usize, defect: f64 },

    /// A matrix diagonal entry differs from 1 beyond 1e-12.
    #[error("matrix diagonal entry [{i}][{i}] = {value} is not 1 (correlation matrices have unit diagonal)")]
    NotUnitDiagonal { i: usize, value: f64 },

    /// A correlation argument fell outside [-1, 1] or was non-finite.
    #[error("correlation {value} out of range (must be finite and within [-1, 1])")]
    CorrelationOutOfRange { value: f64 },

    /// A sign-correlation value is not on the attainable grid for N samples.
    #[error("sign correlation {value} is not on the {{-1 + 2k/{n}}} grid")]
    OffGrid { value: f64, n: usize },

    /// A tolerance argument must be positive and finite.
    #[error("tolerance {value} must be positive and finite")]
    InvalidTolerance { value: f64 },

    /// A channel had zero empirical variance, so it cannot be normalized.
    #[error("channel {channel} has zero variance; sample correlation is undefined")]
    ZeroVariance { channel: usize },

    /// The eigensolver failed to reach its off-diagonal threshold.
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    EigConvergence { sweeps: usize },

    /// An enumeration request exceeds the configuration budget.
    #[error("enumeration space 2^{required_log2} configurations exceeds budget {budget}; raise the budget to override")]
    BudgetExceeded { required_log2: u32, budget: u128 },

    /// An enumeration request exceeds the per-channel word width.
    #[error("enumeration supports at most 64 samples per channel (got N = {n})")]
    EnumerationTooWide { n: usize },

    /// A counterexample was requested below the dimension where one exists.
    #[error("no counterexample exists for {mode} signals with p = {p}: estimates are guaranteed positive semidefinite for p <= {limit}")]
    NoCounterexample {
        mode: &'static str,
        p: usize,
        limit: usize,
    },

    /// A distribution parameter (e.g. Student-t degrees of freedom) is invalid.
    #[error("invalid distribution parameter: {reason}")]
    InvalidDistribution { reason: String },

    /// Malformed numeric text input (CSV); positions are 1-based.
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// File I/O failure, with the offending path.
    #[error("cannot {action} {path}: {message}")]
    Io {
        action: &'static str,
        path: String,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
