use thiserror::Error;

/// Everything that can go wrong across the crate, from bad physical
/// parameters to a solver giving up. The CLI maps these onto exit codes, so
/// the variants stay coarse on purpose.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("wavepackets live on different frequency grids")]
    GridMismatch,

    #[error("frequency grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("reflection coefficient is singular at nu = {nu}")]
    SingularParams { nu: f64 },

    #[error("integrator failed at t = {t}: {reason}")]
    SolverFailure { t: f64, reason: String },

    #[error("cavity transient has not decayed by the end of the window (|chi| = {chi_end:.3e}); extend the time span")]
    TransientNotDecayed { chi_end: f64 },

    #[error("qubit state is not normalized (|alpha|^2 + |beta|^2 = {norm})")]
    UnnormalizedState { norm: f64 },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
