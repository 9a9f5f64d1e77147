use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the operation's domain (bad index, qubit cap, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("hermiticity check failed: max |m - m†| = {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("trace check failed: |tr(m) - 1| = {deviation:e} exceeds {tol:e}")]
    TraceDeviation { deviation: f64, tol: f64 },

    #[error("positivity check failed: minimum eigenvalue {min_eigenvalue:e} below -{tol:e}")]
    NegativeEigenvalue { min_eigenvalue: f64, tol: f64 },

    #[error("inadmissible polarization vector: {0}")]
    InadmissiblePolarization(Box<Error>),

    #[error("state is not pure: tr(rho^2) = {purity}")]
    NotPure { purity: f64 },

    #[error("unitarity check failed: max |U†U - I| = {deviation:e} exceeds {tol:e}")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("trace-preservation check failed: max |ΣK†K - I| = {deviation:e} exceeds {tol:e}")]
    NotTracePreserving { deviation: f64, tol: f64 },

    /// A channel produced something that is not a density matrix.
    #[error("channel defect: {0}")]
    ChannelDefect(Box<Error>),

    /// Internal numerical consistency checks (imaginary residues, out-of-range results).
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("construction error: {0}")]
    Construction(String),
}

impl Error {
    /// True for errors caused by malformed or invalid input, as opposed to
    /// computation-level consistency failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Consistency(_) | Error::Construction(_))
    }
}
