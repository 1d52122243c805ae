use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("site index {index} outside array -{half_width}..={half_width}")]
    IndexOutOfRange { index: i64, half_width: usize },
    #[error("array half-width {half_width} cannot hold the two-site input (need at least 1)")]
    Capacity { half_width: usize },
    #[error("Bessel argument must be finite and |x| <= 1e6, got {0}")]
    Domain(f64),
    #[error("propagation distance must be non-negative and finite, got {0}")]
    NegativeDistance(f64),
    #[error("RK4 step {step} exceeds the stability limit {limit}")]
    StepTooLarge { step: f64, limit: f64 },
    #[error("non-finite amplitude encountered at z = {z}")]
    NumericalFailure { z: f64 },
    #[error("k-grid of {points} points aliases a {half_width}-site half-width (need an odd count >= {required})")]
    Aliasing { points: usize, half_width: usize, required: usize },
    #[error("spectral grid mismatch: {0}")]
    GridMismatch(String),
    #[error("a flat array (ramp = 0) has no finite Bloch period")]
    NoFinitePeriod,
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Self::InvalidParameter { field, reason: reason.into() }
    }
}
