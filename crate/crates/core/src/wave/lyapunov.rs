//! Lyapunov function of the profile system near the coexistence lift.
//!
//! ```text
//! L = (a21/a12)(X1 - u* ln X1) + (X2 - v* ln X2) + g G(Y, Z),
//! g = a13 a21 / (a12 a31)
//! ```
//!
//! With `G = Y - w* ln Y - (Y - Z)(1 - w*/Y)` the orbital derivative is
//!
//! ```text
//! L' = -(a21 r1/a12)(X1 - u*)^2 - r2 (X2 - v*)^2 - g rho w* (Y - Z)^2 / Y^2 <= 0.
//! ```
//!
//! The variant with `(1 - 1/Y)` in the last term agrees with it only when
//! `w* = 1`; otherwise its derivative picks up the indefinite terms
//! `g rho (1 - w*)(Y - Z)/Y + (a21 a13/a12)(w* - 1)(X1 - u*)`. Both are
//! available so the difference can be observed along computed profiles.

use serde::{Deserialize, Serialize};

use super::profile::{profile_rhs, ProfileState, WaveConfig};
use crate::equilibria::coexistence_coords;
use crate::error::WaveError;
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveLyapunovForm {
    /// `(Y - Z)(1 - w*/Y)`: nonincreasing along every orbit in the open
    /// positive cone.
    #[default]
    EquilibriumShift,
    /// `(Y - Z)(1 - 1/Y)`.
    UnitShift,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveLyapunov {
    pub value: f64,
    /// Orbital derivative along the profile field.
    pub derivative: f64,
}

fn weights(p: &ModelParams) -> (f64, f64) {
    (p.a21 / p.a12, p.a13 * p.a21 / (p.a12 * p.a31))
}

fn check_domain(s: &ProfileState) -> Result<(), WaveError> {
    if s.x1 > 0.0 && s.x2 > 0.0 && s.y > 0.0 {
        Ok(())
    } else {
        Err(WaveError::Precondition(format!(
            "wave Lyapunov function needs X1, X2, Y > 0, got {s}"
        )))
    }
}

/// Value and closed-form orbital derivative of the consistent form.
pub fn wave_lyapunov(p: &ModelParams, cfg: &WaveConfig, s: &ProfileState) -> Result<WaveLyapunov, WaveError> {
    wave_lyapunov_with(p, cfg, s, WaveLyapunovForm::EquilibriumShift)
}

pub fn wave_lyapunov_with(
    p: &ModelParams,
    cfg: &WaveConfig,
    s: &ProfileState,
    form: WaveLyapunovForm,
) -> Result<WaveLyapunov, WaveError> {
    check_domain(s)?;
    let e = coexistence_coords(p);
    let (a, g) = weights(p);
    let (dx1, dx2, yz) = (s.x1 - e.u, s.x2 - e.v, s.y - s.z);
    let shift = match form {
        WaveLyapunovForm::EquilibriumShift => e.w,
        WaveLyapunovForm::UnitShift => 1.0,
    };
    let value = a * (s.x1 - e.u * s.x1.ln())
        + (s.x2 - e.v * s.x2.ln())
        + g * (s.y - e.w * s.y.ln() - yz * (1.0 - shift / s.y));
    let rho = cfg.rho;
    let mut derivative =
        -a * p.r1 * dx1 * dx1 - p.r2 * dx2 * dx2 - g * rho * e.w * yz * yz / (s.y * s.y);
    if form == WaveLyapunovForm::UnitShift {
        derivative = -a * p.r1 * dx1 * dx1 - p.r2 * dx2 * dx2 - g * rho * yz * yz / (s.y * s.y)
            + g * rho * (1.0 - e.w) * yz / s.y
            + a * p.a13 * (e.w - 1.0) * dx1;
    }
    Ok(WaveLyapunov { value, derivative })
}

/// `(dL/dX1, dL/dX2, dL/dY, dL/dZ)`.
pub fn wave_lyapunov_gradient(
    p: &ModelParams,
    s: &ProfileState,
    form: WaveLyapunovForm,
) -> Result<[f64; 4], WaveError> {
    check_domain(s)?;
    let e = coexistence_coords(p);
    let (a, g) = weights(p);
    let shift = match form {
        WaveLyapunovForm::EquilibriumShift => e.w,
        WaveLyapunovForm::UnitShift => 1.0,
    };
    let yz = s.y - s.z;
    Ok([
        a * (1.0 - e.u / s.x1),
        1.0 - e.v / s.x2,
        g * (1.0 - e.w / s.y - (1.0 - shift / s.y) - yz * shift / (s.y * s.y)),
        g * (1.0 - shift / s.y),
    ])
}

/// `grad L . F`, the derivative computed without the closed form.
pub fn wave_lyapunov_chain_rule(
    p: &ModelParams,
    cfg: &WaveConfig,
    s: &ProfileState,
    form: WaveLyapunovForm,
) -> Result<f64, WaveError> {
    let grad = wave_lyapunov_gradient(p, s, form)?;
    let f = profile_rhs(p, cfg, s).to_array();
    Ok(grad.iter().zip(&f).map(|(g, f)| g * f).sum())
}
