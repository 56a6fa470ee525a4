use thiserror::Error;

/// Everything that can go wrong while configuring, solving or persisting a run.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("value {value} out of range [{lo}, {hi}] for {what}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("g(rho) = rho(1 + gamma v(rho)) is not monotone: gamma*|v'|_inf = {0} >= 1")]
    NonMonotoneG(f64),

    #[error("gamma = {gamma} exceeds the admissible threshold gamma_max = {gamma_max} (smallness condition min{{1/(3(v_max+|v'|)), beta/(w(0)|v'|)}})")]
    GammaTooLarge { gamma: f64, gamma_max: f64 },

    #[error("kernel truncation too coarse: captured mass {captured} < {required}")]
    TruncationTooCoarse { captured: f64, required: f64 },

    #[error("operation requires an exponential kernel")]
    KernelMismatch,

    #[error("sample at t = {t} lies beyond the stored frontier t = {frontier}")]
    FutureSample { t: f64, frontier: f64 },

    #[error("Picard iteration failed to contract (window {window}, residual {residual:e} after {iterations} iterations)")]
    NoContraction {
        window: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("characteristic trace overshoots t = 0 by more than one substep")]
    StepTooLarge,

    #[error("CFL violation: courant number {courant} > {limit}")]
    Cfl { courant: f64, limit: f64 },

    #[error("positivity breach: {what} = {value} at cell {cell}")]
    PositivityBreach {
        what: &'static str,
        value: f64,
        cell: usize,
    },

    #[error("nonpositive density {0}: Riemann invariants need rho > 0")]
    NonpositiveDensity(f64),

    #[error("identical initial data: stability ratio undefined")]
    IdenticalData,

    #[error("test function support touches the boundary of the computational domain")]
    TestFunctionSupport,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Broad failure classes, used to pick CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Admissibility,
    Numerical,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidModel(_)
            | Error::OutOfRange { .. }
            | Error::NonMonotoneG(_)
            | Error::GammaTooLarge { .. }
            | Error::KernelMismatch
            | Error::Config(_)
            | Error::IdenticalData
            | Error::TestFunctionSupport => ErrorClass::Admissibility,
            Error::Io(_) | Error::Json(_) => ErrorClass::Io,
            _ => ErrorClass::Numerical,
        }
    }

    /// Process exit code: 2 admissibility, 3 numerical, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Admissibility => 2,
            ErrorClass::Numerical => 3,
            ErrorClass::Io => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
