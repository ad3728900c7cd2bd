use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent configuration input.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical self-check (convergence, conservation) failed.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The physical situation is outside the regime an analysis assumes.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
