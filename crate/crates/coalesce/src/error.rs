use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {re}+{im}i lies within the exclusion radius of a singularity")]
    SingularityHit { re: f64, im: f64 },
    #[error("step size underflow at w = {w}")]
    StepFailure { w: f64 },
    #[error("|phi| or |q_s| fell below {floor} at w = {w}")]
    DivisionNearZero { w: f64, floor: f64 },
    #[error("only {found} extrema in the measurement window")]
    WindowTooShort { found: usize },
    #[error("residual {residual:e} is below the noise floor {floor:e}")]
    NoWaveDetected { residual: f64, floor: f64 },
    #[error("integration path passes within {clearance:e} of a singularity or cut")]
    PathTooClose { clearance: f64 },
    #[error("adaptive quadrature did not converge (error estimate {estimate:e})")]
    QuadratureFailure { estimate: f64 },
    #[error("argument lies on a branch cut")]
    BranchCutHit,
    #[error("no admissible initial direction for the Stokes line")]
    SeedFailure,
    #[error("Stokes line corrector diverged near {re}+{im}i")]
    CorrectorDivergence { re: f64, im: f64 },
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("value at index {index} is not representable as f64")]
    Overflow { index: usize },
    #[error("extrapolation did not converge (spread {spread:e})")]
    NonConvergence { spread: f64 },
    #[error("residue classes disagree: {0}")]
    BranchMismatch(String),
    #[error("least-squares problem is ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("operation requires sigma1 + sigma2 = 1/3")]
    WrongRegime,
    #[error("Stokes line from singularity {k} does not reach the positive real axis")]
    NoStokesCrossing { k: usize },
    #[error("invalid parameters: {0}")]
    InvalidSpec(String),
    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Stable numeric code used by the C interface.
    pub fn code(&self) -> i32 {
        match self {
            Error::SingularityHit { .. } => 1,
            Error::StepFailure { .. } => 2,
            Error::DivisionNearZero { .. } => 3,
            Error::WindowTooShort { .. } => 4,
            Error::NoWaveDetected { .. } => 5,
            Error::PathTooClose { .. } => 6,
            Error::QuadratureFailure { .. } => 7,
            Error::BranchCutHit => 8,
            Error::SeedFailure => 9,
            Error::CorrectorDivergence { .. } => 10,
            Error::DomainError(_) => 11,
            Error::Overflow { .. } => 12,
            Error::NonConvergence { .. } => 13,
            Error::BranchMismatch(_) => 14,
            Error::IllConditioned(_) => 15,
            Error::WrongRegime => 16,
            Error::NoStokesCrossing { .. } => 17,
            Error::InvalidSpec(_) => 18,
            Error::Io(_) => 19,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
