use thiserror::Error;

/// Errors surfaced by the spectral and stochastic kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode count {requested} exceeds the configured cap {cap}")]
    CapacityExceeded { requested: usize, cap: usize },

    #[error("grid too coarse on axis {axis}: {points} points cannot resolve frequency {max_frequency} without aliasing (need at least {required})")]
    GridTooCoarse {
        axis: usize,
        points: usize,
        max_frequency: u32,
        required: usize,
    },

    #[error("coefficient length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("bases differ between operands")]
    BasisMismatch,

    #[error("random family is not certified for {requirement}")]
    UncertifiedFamily { requirement: &'static str },

    #[error("invalid random family: {reason}")]
    InvalidFamily { reason: String },

    #[error("inadmissible couple: {constraint}")]
    InadmissiblePair { constraint: String },

    #[error("time {t} outside the trajectory range [0, {t_max}]")]
    TrajectoryOutOfRange { t: f64, t_max: f64 },

    #[error("time {t} is not a trajectory grid point (spacing {dt})")]
    OffGridTime { t: f64, dt: f64 },

    #[error("bubble scale n={n} unresolved: needs per-axis frequency {required_frequency}, basis provides {available_frequency} (about {required_rank} ranks)")]
    UnresolvedScale {
        n: u32,
        required_frequency: u32,
        available_frequency: u32,
        required_rank: usize,
    },

    #[error("exact enumeration unsupported: {reason}")]
    EnumerationUnsupported { reason: String },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
