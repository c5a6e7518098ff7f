//! Traveling-profile system in Lienard coordinates.
//!
//! A profile `(U, V, W)(x + c t)` satisfies a second-order equation in `W`.
//! With `X1 = U`, `X2 = V`, `Y = W` and `Z = W - (d/c) W'` (time rescaled by
//! `c`) it becomes the first-order system
//!
//! ```text
//! X1' = X1 (r1 (1 - X1) - a12 X2 - a13 Y)
//! X2' = X2 (r2 (1 - X2) + a21 X1)
//! Y'  = rho (Y - Z),            rho = c^2 / d
//! Z'  = Y (-mu + a31 X1)
//! ```
//!
//! A front from the prey-only state to coexistence is a heteroclinic orbit
//! from `(1, 0, 0, 0)` to `(u*, v*, w*, w*)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::equilibria::coexistence_coords;
use crate::error::WaveError;
use crate::model::ModelParams;

/// Relative width of the band around `c = c*` treated as the repeated
/// eigenvalue case.
pub const CRITICAL_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveConfig {
    pub c: f64,
    /// `c^2 / d`.
    pub rho: f64,
    /// Lower wedge slope; `None` when `c <= c*` (it would be complex).
    pub sigma1: Option<f64>,
    /// Upper wedge slope, always real.
    pub sigma2: f64,
    /// Minimal speed `2 sqrt(d (a31 - mu))`.
    pub c_star: f64,
    pub subcritical: bool,
    /// `c` within [`CRITICAL_BAND`] of `c*`.
    pub critical: bool,
}

impl WaveConfig {
    /// Lower slope, or an error explaining why the wedge is undefined.
    pub fn require_sigma1(&self) -> Result<f64, WaveError> {
        self.sigma1.ok_or_else(|| {
            WaveError::Precondition(format!(
                "wedge undefined: c = {} is not above c* = {}",
                self.c, self.c_star
            ))
        })
    }

    pub fn is_supercritical(&self) -> bool {
        !self.subcritical && !self.critical
    }
}

pub fn minimal_speed(p: &ModelParams) -> f64 {
    2.0 * (p.d * (p.a31 - p.mu)).sqrt()
}

/// `rho^2 - 4 rho (a31 - mu)`, the discriminant of the characteristic
/// polynomial of the `(Y, Z)` block at the prey-only state.
pub fn discriminant(p: &ModelParams, rho: f64) -> f64 {
    rho * rho - 4.0 * rho * (p.a31 - p.mu)
}

pub fn wave_config(p: &ModelParams, c: f64) -> Result<WaveConfig, WaveError> {
    p.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(WaveError::NonPositiveSpeed(c));
    }
    if p.a31 <= p.mu {
        return Err(WaveError::NoPersistence {
            a31: p.a31,
            mu: p.mu,
        });
    }
    let rho = c * c / p.d;
    let disc = discriminant(p, rho);
    let critical = disc.abs() <= CRITICAL_BAND * rho * rho;
    let subcritical = disc < 0.0 && !critical;
    let sigma1 = if disc > 0.0 && !critical {
        Some((rho + disc.sqrt()) / (2.0 * rho))
    } else {
        None
    };
    let sigma2 = (rho + (rho * rho + 4.0 * rho * p.mu).sqrt()) / (2.0 * rho);
    Ok(WaveConfig {
        c,
        rho,
        sigma1,
        sigma2,
        c_star: minimal_speed(p),
        subcritical,
        critical,
    })
}

/// A point `(X1, X2, Y, Z)` of the profile phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProfileState {
    pub x1: f64,
    pub x2: f64,
    pub y: f64,
    pub z: f64,
}

impl ProfileState {
    pub const fn new(x1: f64, x2: f64, y: f64, z: f64) -> Self {
        Self { x1, x2, y, z }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.y, self.z]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    /// Sup-norm distance.
    pub fn distance(&self, other: &ProfileState) -> f64 {
        let (a, b) = (self.to_array(), other.to_array());
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

impl Add for ProfileState {
    type Output = ProfileState;
    fn add(self, o: ProfileState) -> ProfileState {
        ProfileState::new(self.x1 + o.x1, self.x2 + o.x2, self.y + o.y, self.z + o.z)
    }
}

impl Sub for ProfileState {
    type Output = ProfileState;
    fn sub(self, o: ProfileState) -> ProfileState {
        ProfileState::new(self.x1 - o.x1, self.x2 - o.x2, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for ProfileState {
    type Output = ProfileState;
    fn mul(self, k: f64) -> ProfileState {
        ProfileState::new(self.x1 * k, self.x2 * k, self.y * k, self.z * k)
    }
}

impl fmt::Display for ProfileState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x1, self.x2, self.y, self.z)
    }
}

/// Lift of the prey-only state `E1`.
pub fn prey_only_lift() -> ProfileState {
    ProfileState::new(1.0, 0.0, 0.0, 0.0)
}

/// Lift `(u*, v*, w*, w*)` of the coexistence state.
pub fn coexistence_lift(p: &ModelParams) -> ProfileState {
    let s = coexistence_coords(p);
    ProfileState::new(s.u, s.v, s.w, s.w)
}

#[inline]
pub(crate) fn profile_rhs_array(p: &ModelParams, rho: f64, s: &[f64; 4]) -> [f64; 4] {
    let [x1, x2, y, z] = *s;
    [
        x1 * (p.r1 * (1.0 - x1) - p.a12 * x2 - p.a13 * y),
        x2 * (p.r2 * (1.0 - x2) + p.a21 * x1),
        rho * (y - z),
        y * (-p.mu + p.a31 * x1),
    ]
}

pub fn profile_rhs(p: &ModelParams, cfg: &WaveConfig, s: &ProfileState) -> ProfileState {
    ProfileState::from_array(profile_rhs_array(p, cfg.rho, &s.to_array()))
}
