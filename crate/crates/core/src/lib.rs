//! Analysis and simulation of a three-species reaction-diffusion model in
//! which a prey `u` is consumed by a generalist predator `v` (with its own
//! logistic growth) and by a diffusing specialist predator `w`.
//!
//! * [`model`]: parameters, reaction field, Jacobian and standing assumptions.
//! * [`equilibria`]: the six steady states, their spectra and the global
//!   regime of the reaction system.
//! * [`lyapunov`]: Lyapunov functions for the globally stable states.
//! * [`ode`]: adaptive integration with trajectory monitors.
//! * [`wave`]: traveling fronts from the prey-only state to coexistence by
//!   shooting inside a wedge-shaped isolating region.
//! * [`pde`]: method-of-lines simulation on an interval with zero-flux
//!   boundaries, invasion scenarios and front-speed measurement.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibria;
pub mod error;
pub mod lyapunov;
pub mod model;
pub mod ode;
pub mod pde;
pub mod wave;

pub use equilibria::{
    analyze, classify_equilibrium, compute_equilibria, regime, AnalysisReport, Equilibrium,
    EquilibriumName, Regime, RegimeVerdict, Verdict,
};
pub use error::{IntegrateError, ModelError, OdeError, PdeError, WaveError};
pub use model::{
    check_assumptions, load_params_toml, reaction_jacobian, reaction_rhs, AssumptionReport,
    LoadedParams, ModelParams, OdeState, ParamsSpec,
};
pub use num_complex::Complex64;
pub use pde::{front_speed, make_scenario, Field1D, FrontTrace, Grid1D, SpaceTimeRecord};
pub use wave::{find_wave, wave_config, FaceClass, ProfileState, ShotVerdict, WaveConfig, WaveSolution};
