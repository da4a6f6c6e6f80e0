use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("photon truncation n_max must be at least 1 (got {0})")]
    InvalidTruncation(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operators live on different spaces: {0}")]
    LayoutMismatch(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("matrix is singular at pivot {pivot}")]
    Singular { pivot: usize },

    #[error("steady state is not unique: {0}")]
    DegenerateSteadyState(String),

    #[error("steady state residual {residual:e} exceeds tolerance {tolerance:e}")]
    SteadyStateResidual { residual: f64, tolerance: f64 },

    #[error(
        "density matrix has eigenvalue {min_eigenvalue:e} below tolerance; increase n_max \
         (currently {n_max})"
    )]
    TruncationTooSmall { min_eigenvalue: f64, n_max: usize },

    #[error("integration failed at t = {t:e} ns with step {step:e} ns after {steps} steps: {reason}")]
    IntegrationFailure {
        t: f64,
        step: f64,
        steps: usize,
        reason: &'static str,
    },

    #[error("grid spacing {spacing:e} ns too coarse for detector FWHM {fwhm:e} ns (need <= FWHM/10)")]
    GridTooCoarse { spacing: f64, fwhm: f64 },

    #[error("delay grid must be non-empty, non-negative, uniform and increasing: {0}")]
    InvalidGrid(String),

    #[error("mean photon number {mean:e} is below the intensity floor")]
    LowIntensity { mean: f64 },

    #[error("truncation residual {residual:e} exceeds {tolerance:e}; increase n_max")]
    TruncationResidual { residual: f64, tolerance: f64 },

    #[error("approximation only valid for zero displacement and squeeze phases")]
    NonZeroPhase,

    #[error("no feasible output projection: every coarse grid point is below the intensity floor")]
    NoFeasibleOutput,

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
