use thiserror::Error;

/// Errors reported by the solvers and oracles.
///
/// The variants distinguish three situations a caller may want to handle
/// differently: the input is malformed (`Parse`, `Validation`, `Domain`),
/// the problem itself has no answer (`EmptyConsistentSet`,
/// `InfiniteWorstCase`, `UnboundedGwce`, `StrictFeasibility`), or a
/// numerical routine could not meet its contract (`NotSymmetric`,
/// `RankDeficient`, `RootNotFound`, `NumericalGuard`).
#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("invalid instance JSON: {0}")]
    Parse(String),

    #[error("invalid instance: {0}")]
    Validation(String),

    #[error("operation not applicable: {0}")]
    Domain(String),

    #[error("matrix is not symmetric (max asymmetry {max_asym:.3e})")]
    NotSymmetric { max_asym: f64 },

    #[error("matrix is numerically rank deficient (lambda_min = {lambda_min:.6e}): {what}")]
    RankDeficient { lambda_min: f64, what: String },

    #[error(
        "the approximation space meets the kernel of the observation map \
         (smallest singular value {sigma_min:.3e}); the worst-case error is infinite"
    )]
    InfiniteWorstCase { sigma_min: f64 },

    #[error(
        "no element satisfies both constraints: the data misfit floor {delta:.6e} \
         exceeds the combined budget {budget:.6e}"
    )]
    EmptyConsistentSet { delta: f64, budget: f64 },

    #[error("the consistent set has empty interior: {0}")]
    StrictFeasibility(String),

    #[error("root of the spectral equation not found: {0}")]
    RootNotFound(String),

    #[error(
        "the map does not annihilate the approximation space; its worst-case error is unbounded"
    )]
    UnboundedGwce,

    #[error("numerical guard tripped: {0}")]
    NumericalGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
