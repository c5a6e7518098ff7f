//! Lyapunov functions certifying global stability of `E12` and the
//! coexistence state.
//!
//! Both are Volterra-type sums `c_i (x_i - x_i* ln x_i)`. The weights that
//! make the cross terms of the orbital derivative cancel are `a21/a12` on
//! the prey and `a13 a21 / (a12 a31)` on the specialist. The reciprocal prey
//! weight `a12/a21` is kept as an alternative ([`PreyWeight`]) so that its
//! failure can be demonstrated numerically.

use serde::Serialize;

use crate::equilibria::{coexistence_coords, e12_coords};
use crate::error::ModelError;
use crate::model::{check_assumptions, rhs_array, ModelParams, OdeState};

/// Weight on the prey term of the coexistence Lyapunov function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PreyWeight {
    /// `a21 / a12`: cancels the prey/generalist cross term.
    #[default]
    ConversionOverConsumption,
    /// `a12 / a21`.
    ConsumptionOverConversion,
}

impl PreyWeight {
    pub fn value(self, p: &ModelParams) -> f64 {
        match self {
            PreyWeight::ConversionOverConsumption => p.a21 / p.a12,
            PreyWeight::ConsumptionOverConversion => p.a12 / p.a21,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LyapunovKind {
    /// Certifies `E12` when `mu >= a31 u12`.
    V12,
    /// Certifies the coexistence state under H3.
    Vstar(PreyWeight),
}

fn specialist_weight(p: &ModelParams) -> f64 {
    p.a13 * p.a21 / (p.a12 * p.a31)
}

/// `x - x* ln x`, minimized at `x = x*`.
#[inline]
fn volterra(x: f64, target: f64) -> f64 {
    x - target * x.ln()
}

fn require_positive(s: &OdeState, need_w: bool) -> Result<(), ModelError> {
    if !s.is_finite() {
        return Err(ModelError::InvalidState(*s));
    }
    if s.u <= 0.0 || s.v <= 0.0 {
        return Err(ModelError::Domain {
            state: *s,
            reason: "u and v must be positive",
        });
    }
    if need_w && s.w <= 0.0 {
        return Err(ModelError::Domain {
            state: *s,
            reason: "w must be positive",
        });
    }
    Ok(())
}

fn require_e12(p: &ModelParams) -> Result<(), ModelError> {
    if check_assumptions(p).h1 {
        Ok(())
    } else {
        Err(ModelError::NonexistentEquilibrium(
            crate::equilibria::EquilibriumName::E12,
        ))
    }
}

fn require_estar(p: &ModelParams) -> Result<(), ModelError> {
    if check_assumptions(p).h3 {
        Ok(())
    } else {
        Err(ModelError::NonexistentEquilibrium(
            crate::equilibria::EquilibriumName::Estar,
        ))
    }
}

/// `V12 = (a21/a12)(u - u12 ln u) + (v - v12 ln v) + a13 a21/(a12 a31) w`.
pub fn lyapunov_v12(p: &ModelParams, s: &OdeState) -> Result<f64, ModelError> {
    require_e12(p)?;
    require_positive(s, false)?;
    let (u12, v12) = e12_coords(p);
    Ok(p.a21 / p.a12 * volterra(s.u, u12) + volterra(s.v, v12) + specialist_weight(p) * s.w)
}

/// Closed-form orbital derivative of `V12`:
/// `-(r1 a21/a12)(u-u12)^2 - r2 (v-v12)^2 + a13 a21/(a12 a31) (a31 u12 - mu) w`.
pub fn lyapunov_v12_derivative(p: &ModelParams, s: &OdeState) -> Result<f64, ModelError> {
    require_e12(p)?;
    require_positive(s, false)?;
    let (u12, v12) = e12_coords(p);
    Ok(-(p.r1 * p.a21 / p.a12) * (s.u - u12).powi(2) - p.r2 * (s.v - v12).powi(2)
        + specialist_weight(p) * (p.a31 * u12 - p.mu) * s.w)
}

pub fn lyapunov_vstar(p: &ModelParams, s: &OdeState, weight: PreyWeight) -> Result<f64, ModelError> {
    require_estar(p)?;
    require_positive(s, true)?;
    let star = coexistence_coords(p);
    Ok(weight.value(p) * volterra(s.u, star.u)
        + volterra(s.v, star.v)
        + specialist_weight(p) * volterra(s.w, star.w))
}

/// Closed-form orbital derivative of `Vstar` with the cancelling prey
/// weight: `-(r1 a21/a12)(u-u*)^2 - r2 (v-v*)^2`.
pub fn lyapunov_vstar_derivative(p: &ModelParams, s: &OdeState) -> Result<f64, ModelError> {
    require_estar(p)?;
    require_positive(s, true)?;
    let star = coexistence_coords(p);
    Ok(-(p.r1 * p.a21 / p.a12) * (s.u - star.u).powi(2) - p.r2 * (s.v - star.v).powi(2))
}

/// Gradient of the chosen function, used for the chain-rule route
/// `grad V . f`.
pub fn gradient(p: &ModelParams, kind: LyapunovKind, s: &OdeState) -> Result<[f64; 3], ModelError> {
    match kind {
        LyapunovKind::V12 => {
            require_e12(p)?;
            require_positive(s, false)?;
            let (u12, v12) = e12_coords(p);
            Ok([
                p.a21 / p.a12 * (1.0 - u12 / s.u),
                1.0 - v12 / s.v,
                specialist_weight(p),
            ])
        }
        LyapunovKind::Vstar(weight) => {
            require_estar(p)?;
            require_positive(s, true)?;
            let star = coexistence_coords(p);
            Ok([
                weight.value(p) * (1.0 - star.u / s.u),
                1.0 - star.v / s.v,
                specialist_weight(p) * (1.0 - star.w / s.w),
            ])
        }
    }
}

pub fn evaluate(p: &ModelParams, kind: LyapunovKind, s: &OdeState) -> Result<f64, ModelError> {
    match kind {
        LyapunovKind::V12 => lyapunov_v12(p, s),
        LyapunovKind::Vstar(weight) => lyapunov_vstar(p, s, weight),
    }
}

/// `grad V . f(s)`.
pub fn chain_rule_derivative(
    p: &ModelParams,
    kind: LyapunovKind,
    s: &OdeState,
) -> Result<f64, ModelError> {
    let g = gradient(p, kind, s)?;
    let f = rhs_array(p, &s.to_array());
    Ok(g.iter().zip(f.iter()).map(|(a, b)| a * b).sum())
}
