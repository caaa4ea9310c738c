use thiserror::Error;

/// Errors raised by the numerical kernels, the state model and the checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("eigensolver did not converge: off-diagonal residual {residual:e}")]
    NumericalFailure { residual: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    NotPsd { eigenvalue: f64 },

    #[error("matrix is not Hermitian: max |H - H†| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("branch probability {prob:e} is below the conditioning floor")]
    ZeroProbabilityBranch { prob: f64 },

    #[error("not a projector: {0}")]
    InvalidProjector(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid effect: {0}")]
    InvalidEffect(String),

    #[error("invalid measurement operator: {0}")]
    InvalidMeasurement(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("trajectory died at step {step}; final state is undefined")]
    DeadTrajectory { step: usize },

    #[error("construction failed: {0}")]
    ConstructionFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimMismatch { expected, found })
    }
}
