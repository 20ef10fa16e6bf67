use thiserror::Error;

/// Failure modes shared by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {x} lies outside the domain [{min}, {max}]")]
    OutOfDomain { x: f64, min: f64, max: f64 },

    #[error("accuracy precondition violated: {0}")]
    Accuracy(String),

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("argument outside supported range: {0}")]
    Range(String),

    #[error("momentum {p} is not on the lattice (spacing {dp})")]
    OffLattice { p: f64, dp: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
