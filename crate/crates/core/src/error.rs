//! Error types shared by all solver and diagnostic modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A grid field failed validation (wrong size, non-finite samples, ...).
    #[error("invalid field: {0}")]
    InvalidField(String),

    /// A diffeomorphism left the group: its discrete slope dipped to or below
    /// the guard threshold. Signals wave breaking when raised during a run.
    #[error("monotonicity lost: min slope {min_slope:.6e} <= threshold {threshold:.6e}")]
    MonotonicityLost { min_slope: f64, threshold: f64 },

    /// An iteration (Newton inversion, shooting) hit its cap without meeting
    /// its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:.6e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// The solution amplitude exceeded the configured guard.
    #[error("blow-up: amplitude {amplitude:.6e} exceeds bound {bound:.6e}")]
    BlowUp { amplitude: f64, bound: f64 },

    /// The cyclic tridiagonal solve for the conjugated Helmholtz operator broke down.
    #[error("linear solve failure: {0}")]
    LinearSolveFailure(String),

    /// Too few Fourier modes above the noise floor to fit a decay slope.
    #[error("degenerate spectrum: only {modes} modes above the floor in the fit band")]
    DegenerateSpectrum { modes: usize },

    /// A solver configuration failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A quadrature did not behave as expected under refinement.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
}
