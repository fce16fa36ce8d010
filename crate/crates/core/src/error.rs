use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// Every variant maps onto a stable numeric code (see [`Error::code`]) which
/// the C ABI exposes unchanged.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("points are {distance:e} apart but the bracket requires at most {tau:e}")]
    DistanceExceedsTau { distance: f64, tau: f64 },
    #[error("splice is inadmissible at coordinate {0}")]
    InadmissibleSplice(i64),
    #[error("enumeration would produce {requested} points, above the cap of {cap}")]
    BudgetExceeded { requested: u128, cap: usize },
    #[error("return distance {distance:e} is not below the closing threshold {threshold:e}")]
    NotClose { distance: f64, threshold: f64 },
    #[error("closing solve failed: {0}")]
    SolveFailure(String),
    #[error("no admissible word connects symbol {from} to symbol {to}")]
    NoConnectingWord { from: u8, to: u8 },
    #[error("matrix product ill-conditioned at step {step} (condition number {condition:e})")]
    IllConditioned { step: i64, condition: f64 },
    #[error("growth constants cannot be certified: {0}")]
    NotCertifiable(String),
    #[error("conjugating map is singular: {0}")]
    SingularQ(String),
    #[error("points do not lie on a common {side} set")]
    NotStablePair { side: &'static str },
    #[error("cocycle is not fiber-bunched (margin {margin:e})")]
    NotFiberBunched { margin: f64 },
    #[error("holonomy did not converge in {steps} steps (tail {tail:e}, increment ratio {ratio:.4})")]
    NoConvergence { steps: usize, tail: f64, ratio: f64 },
    #[error("series tail bound {tail:e} exceeds the allowed fraction at cutoff {cutoff}")]
    TailTooLarge { tail: f64, cutoff: usize },
    #[error("point is not homoclinic to the anchor")]
    NotHomoclinic,
    #[error("extension increments are not Cauchy: {0}")]
    NotCauchy(String),
    #[error("only {found} usable pairs, need at least {needed}")]
    InsufficientPairs { found: usize, needed: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl Error {
    /// Stable numeric code, shared with the C ABI. Zero is reserved for success.
    pub fn code(&self) -> i32 {
        match self {
            Error::InvalidSystem(_) => 10,
            Error::InvalidPoint(_) => 11,
            Error::DistanceExceedsTau { .. } => 12,
            Error::InadmissibleSplice(_) => 13,
            Error::BudgetExceeded { .. } => 14,
            Error::NotClose { .. } => 15,
            Error::SolveFailure(_) => 16,
            Error::NoConnectingWord { .. } => 17,
            Error::IllConditioned { .. } => 20,
            Error::NotCertifiable(_) => 21,
            Error::SingularQ(_) => 22,
            Error::NotStablePair { .. } => 30,
            Error::NotFiberBunched { .. } => 31,
            Error::NoConvergence { .. } => 32,
            Error::TailTooLarge { .. } => 33,
            Error::NotHomoclinic => 40,
            Error::NotCauchy(_) => 41,
            Error::InsufficientPairs { .. } => 42,
            Error::DimensionMismatch { .. } => 50,
            Error::ConfigInvalid(_) => 60,
            Error::Io(_) => 61,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
