use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("map is not a symplectomorphism (defects {linear_defect:e}, {cross_defect:e})")]
    NotSymplectic { linear_defect: f64, cross_defect: f64 },

    #[error("eigen-solver failed: {0}")]
    Eigensolver(String),

    #[error("step size must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time {t} is not on the flow grid")]
    OffGrid { t: f64 },

    #[error("symplecticity drift {defect:e} at t = {t} exceeds {limit:e}")]
    SymplecticDrift { t: f64, defect: f64, limit: f64 },

    #[error("invalid quadrature rule: {0}")]
    InvalidQuadrature(String),

    #[error("symbol degree {degree} exceeds the Fock cutoff {n_max}")]
    DegreeExceedsCutoff { degree: usize, n_max: usize },

    #[error("operator is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("truncation leakage {leakage:e} exceeds threshold {threshold:e}")]
    Leakage { leakage: f64, threshold: f64 },

    #[error("finite-difference step {h} does not fit the grid around t = {t}")]
    StepTooLarge { h: f64, t: f64 },

    #[error("α is not Hermitian at t = {t} (defect {defect:e})")]
    NotHermitian { t: f64, defect: f64 },

    #[error("time {t} lies outside [0, {t_end}]")]
    OutOfRange { t: f64, t_end: f64 },

    #[error("invalid Fock space: {0}")]
    InvalidFockSpace(String),

    #[error("malformed symbol: {0}")]
    MalformedSymbol(String),
}

pub type Result<T> = std::result::Result<T, Error>;
