use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("incomplete configuration: {0}")]
    Incomplete(String),
    #[error("singular input: {0}")]
    Singular(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),
    #[error("eigensolver failed (index {index}): {reason}")]
    Eigen { index: usize, reason: String },
    #[error("no bound state: {0}")]
    NoBoundState(String),
    #[error("no crossover in the search interval: {0}")]
    NoCrossover(String),
    #[error("grid: {0}")]
    Grid(String),
    #[error("unstable time step: {0}")]
    Unstable(String),
    #[error("wave packet reached the grid edge at t = {time}")]
    Truncation { time: f64 },
    #[error("near-resonant frequency: {0}")]
    Resonance(String),
    #[error("fit rejected, relative residual {residual:.3e}")]
    FitRejected { residual: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Configuration-type errors, as opposed to failures of the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Incomplete(_)
                | Error::Unstable(_)
                | Error::Json(_)
        )
    }
}
