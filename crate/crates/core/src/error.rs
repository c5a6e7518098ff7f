use thiserror::Error;

use crate::equilibria::EquilibriumName;
use crate::model::OdeState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameter `{name}` = {value} {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("state {0} is not finite")]
    InvalidState(OdeState),
    #[error("parameter file: {0}")]
    Config(String),
    #[error("{0} does not exist for these parameters")]
    NonexistentEquilibrium(EquilibriumName),
    #[error("Lyapunov function undefined at {state}: {reason}")]
    Domain { state: OdeState, reason: &'static str },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("invalid integration request: {0}")]
    InvalidInput(String),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    TooManySteps(usize),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
}

/// Error type of the trajectory-level ODE operations.
#[derive(Debug, Error)]
pub enum OdeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("integration failed: {source}")]
    Stiff {
        source: IntegrateError,
        /// Everything accepted before the failure.
        partial: Box<crate::ode::Trajectory>,
    },
    #[error("invalid integration request: {0}")]
    InvalidInput(String),
    #[error("trajectory too short: {got} samples, need at least {need}")]
    InsufficientData { got: usize, need: usize },
    #[error("Lyapunov function undefined at sample {index} (t = {time}): {reason}")]
    LyapunovDomain {
        index: usize,
        time: f64,
        reason: &'static str,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("wave speed must be positive, got {0}")]
    NonPositiveSpeed(f64),
    #[error("specialist cannot persist (a31 = {a31} <= mu = {mu}); no wedge exists")]
    NoPersistence { a31: f64, mu: f64 },
    #[error("coexistence state does not exist (H3 expression = {0})")]
    NoCoexistence(f64),
    #[error(
        "wave speed c = {c} is below the minimal speed c* = {c_star}; \
         unstable eigenvalues {lambda2} and {lambda3} are complex"
    )]
    Subcritical {
        c: f64,
        c_star: f64,
        lambda2: num_complex::Complex64,
        lambda3: num_complex::Complex64,
    },
    #[error("wave speed c = {c} equals the minimal speed c* = {c_star} (repeated eigenvalue)")]
    Degenerate { c: f64, c_star: f64 },
    #[error("{0}")]
    Precondition(String),
    #[error("both ends of the shooting curve exit through {0}; retry with a smaller eps")]
    NoBracket(String),
    #[error("orbit started in the wedge interior left through {face} at t = {time}")]
    QFaceExit { face: String, time: f64 },
    #[error("profile integration failed: {0}")]
    Integrate(#[from] IntegrateError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("grid too coarse: n_cells = {0}, need at least 16")]
    GridTooCoarse(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("unknown scenario id {0} (expected 1, 2 or 3)")]
    UnknownScenario(u32),
    #[error("dt = {dt} violates the explicit diffusion bound {limit}")]
    StepSize { dt: f64, limit: f64 },
    #[error("field shape does not match grid ({got} cells, grid has {expected})")]
    Shape { got: usize, expected: usize },
    #[error("invalid run request: {0}")]
    InvalidInput(String),
    #[error("front trace insufficient: {0}")]
    InsufficientTrace(String),
    #[error("non-finite value in field at t = {0}")]
    NonFinite(f64),
}
