use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("singular twist: {0}")]
    SingularTwist(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("series diverges or fails to converge at |z| = {0}")]
    DivergentSeries(f64),
    #[error("representation mismatch: {0}")]
    RepMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pole collision: {0}")]
    PoleCollision(String),
    #[error("no convergence after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by the chosen parameters rather than by a computation.
    pub fn is_regime(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_) | Error::SingularTwist(_) | Error::Regime(_) | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
