use geonoise_core::GeoError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error("non-finite training loss at epoch {epoch} (strategy {strategy}, sigma2 {sigma2}, seed {seed})")]
    NonFiniteLoss {
        epoch: usize,
        strategy: String,
        sigma2: f64,
        seed: u64,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl HarnessError {
    /// Numerical failures as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            HarnessError::Geo(e) => e.is_numerical(),
            HarnessError::NonFiniteLoss { .. } => true,
            HarnessError::InvalidConfig(_) => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
