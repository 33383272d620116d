use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("root solver did not converge after {iterations} iterations (max residual {residual:e})")]
    RootSolver { iterations: usize, residual: f64 },
    #[error("lift did not converge within {cap} lifts (last change {change:e})")]
    LiftNonConvergence { cap: u32, change: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("missing tail certificate: {0}")]
    TailCertificate(String),
    #[error("s = {s} lies within {distance:e} of a pole at {pole}; query the residue instead")]
    NearPole { s: String, pole: String, distance: f64 },
    #[error("x = {x} lies beyond the enumeration bound {bound}")]
    BeyondEnumeration { x: f64, bound: f64 },
    #[error("oscillation analysis needs at least 4 periods, got {0}")]
    TooFewPeriods(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("level {level} exceeds the size guard {max}")]
    LevelTooLarge { level: u32, max: u32 },
    #[error("matrix dimension {dim} exceeds the limit {max}")]
    MatrixTooLarge { dim: usize, max: usize },
    #[error("Jacobi eigensolver hit the sweep cap ({sweeps}) with off-diagonal norm {off:e}")]
    JacobiNoConvergence { sweeps: usize, off: f64 },
    #[error("overflow after {step} lifting steps")]
    Overflow { step: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidModel(_)
                | Error::InvalidArgument(_)
                | Error::Json(_)
                | Error::Unsupported(_)
                | Error::LevelTooLarge { .. }
                | Error::MatrixTooLarge { .. }
                | Error::BeyondEnumeration { .. }
                | Error::TooFewPeriods(_)
                | Error::NearPole { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
