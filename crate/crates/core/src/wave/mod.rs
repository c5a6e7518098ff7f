//! Traveling fronts from the prey-only state to coexistence.

pub mod lyapunov;
pub mod manifold;
pub mod profile;
pub mod shoot;
pub mod wedge;

pub use lyapunov::{wave_lyapunov, wave_lyapunov_with, WaveLyapunov, WaveLyapunovForm};
pub use manifold::{gamma_point, unstable_spectrum, UnstableSpectrum};
pub use profile::{minimal_speed, profile_rhs, wave_config, ProfileState, WaveConfig};
pub use shoot::{
    find_wave, find_wave_with, shoot, FindWaveOptions, ProfileTrajectory, ShotOutcome,
    ShotVerdict, WaveMetadata, WaveSolution,
};
pub use wedge::{boundary_vector_check, classify_point, FaceClass, Wedge};
