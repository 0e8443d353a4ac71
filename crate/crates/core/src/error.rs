use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the library. Usage errors are caller mistakes; the
/// rest are numerical breakdowns.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("delta must be non-zero for the closed-form polynomial")]
    ZeroDelta,

    #[error("closed-form polynomial supports only h(s) = b s, got {0} coefficients")]
    UnsupportedCoefficients(usize),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("root finder stopped after {iterations} iterations with worst residual {worst_residual:e}")]
    RootsNotConverged {
        iterations: usize,
        worst_residual: f64,
        best: Vec<Complex64>,
        residuals: Vec<f64>,
    },

    #[error("QR iteration stalled on active block rows {lo}..={hi} after {iterations} sweeps")]
    QrStalled { lo: usize, hi: usize, iterations: usize },

    #[error("chain exhausted: vector reaches coordinate {coordinate} of {n}")]
    ChainExhausted { coordinate: usize, n: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("near-singular evaluation: {0}")]
    NearSingular(String),

    #[error("symbol curve: {0}")]
    Curve(String),

    #[error("non-finite value produced in {0}")]
    NonFinite(String),

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::ZeroDelta
                | Error::UnsupportedCoefficients(_)
                | Error::Precondition(_)
                | Error::Config(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
