//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The evaluation point sits inside the relative guard band of a root,
    /// so reciprocal power sums would blow past the overflow budget.
    #[error("evaluation point is {distance:.3e} from root {index}, below guard {guard:.3e}")]
    NearRoot {
        index: usize,
        distance: f64,
        guard: f64,
    },

    /// A root that must be simple has a neighbor closer than the guard.
    #[error("root {index} is not simple (nearest neighbor at {distance:.3e})")]
    MultipleRoot { index: usize, distance: f64 },

    /// The input polynomial has a repeated root, which the simultaneous
    /// solver cannot seed around.
    #[error("input polynomial has a repeated root near index {index}")]
    MultipleRootInput { index: usize },

    /// The simultaneous iteration left some points above the residual
    /// tolerance after the sweep budget.
    #[error("{} critical point(s) unconverged after {sweeps} sweeps: {indices:?}", indices.len())]
    NoConvergence { indices: Vec<usize>, sweeps: usize },

    /// Coefficient expansion is only trusted at low degree.
    #[error("degree {n} exceeds the coefficient oracle limit {max}")]
    DegreeTooLarge { n: usize, max: usize },

    /// An operation needed a fully converged critical set.
    #[error("critical set contains unconverged points")]
    UnconvergedCritical,

    #[error("quadrature stalled above tolerance {tol:.3e} (achieved {achieved:.3e})")]
    QuadratureFailure { tol: f64, achieved: f64 },

    #[error("inverse moment defined only for 0 < p < 2, got p = {p}")]
    UnsupportedP { p: f64 },

    #[error("variance of log|z - X| vanishes at this point")]
    DegenerateVariance,

    #[error("need at least {min} degree points, got {got}")]
    InsufficientData { min: usize, got: usize },

    #[error("unsupported schema version {found:?} (expected {expected:?})")]
    SchemaVersion { found: String, expected: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::QuadratureFailure { .. }
                | Error::DegenerateVariance
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
