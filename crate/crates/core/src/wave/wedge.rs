//! The wedge-shaped isolating region
//!
//! ```text
//! 0 <= X1 <= 1,  0 <= X2 <= 1 + a21/r2,  Y >= 0,  sigma1 Y <= Z <= sigma2 Y
//! ```
//!
//! and its faces. Orbits cannot leave through `Q1..Q5` and must leave
//! through `P1` (`Z = sigma1 Y`) or `P2` (`Z = sigma2 Y`) when they leave at
//! all.

use std::fmt;

use serde::Serialize;

use super::profile::{profile_rhs, ProfileState, WaveConfig};
use crate::error::WaveError;
use crate::model::ModelParams;

/// Width of the band in which a face equation counts as satisfied.
pub const FACE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FaceClass {
    Interior,
    /// `X1 = 0`
    Q1,
    /// `X1 = 1`
    Q2,
    /// `X2 = 0`
    Q3,
    /// `X2 = 1 + a21/r2`
    Q4,
    /// `Y = Z = 0`
    Q5,
    /// `Z = sigma1 Y`
    P1,
    /// `Z = sigma2 Y`
    P2,
    Exterior,
}

impl FaceClass {
    pub fn is_exit_face(self) -> bool {
        matches!(self, FaceClass::P1 | FaceClass::P2)
    }

    pub fn is_q_face(self) -> bool {
        matches!(
            self,
            FaceClass::Q1 | FaceClass::Q2 | FaceClass::Q3 | FaceClass::Q4 | FaceClass::Q5
        )
    }
}

impl fmt::Display for FaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Wedge geometry for one speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wedge {
    pub sigma1: f64,
    pub sigma2: f64,
    pub x2_max: f64,
}

impl Wedge {
    pub fn new(p: &ModelParams, cfg: &WaveConfig) -> Result<Self, WaveError> {
        Ok(Self {
            sigma1: cfg.require_sigma1()?,
            sigma2: cfg.sigma2,
            x2_max: p.v_ceiling(),
        })
    }

    /// Signed face functions, all nonnegative on the closed wedge, in the
    /// order `Q1, Q2, Q3, Q4, Q5 (Y), P1, P2`.
    pub fn face_functions(&self, s: &ProfileState) -> [(FaceClass, f64); 7] {
        [
            (FaceClass::Q1, s.x1),
            (FaceClass::Q2, 1.0 - s.x1),
            (FaceClass::Q3, s.x2),
            (FaceClass::Q4, self.x2_max - s.x2),
            (FaceClass::Q5, s.y),
            (FaceClass::P1, s.z - self.sigma1 * s.y),
            (FaceClass::P2, self.sigma2 * s.y - s.z),
        ]
    }

    /// Partition of space into interior, faces and exterior. At edges the
    /// `Q` faces take priority over `P1`/`P2`.
    pub fn classify(&self, s: &ProfileState) -> FaceClass {
        if !s.is_finite() {
            return FaceClass::Exterior;
        }
        let g = self.face_functions(s);
        if g.iter().any(|(_, v)| *v < -FACE_TOL) {
            return FaceClass::Exterior;
        }
        for (face, v) in g {
            if v.abs() <= FACE_TOL {
                return face;
            }
        }
        FaceClass::Interior
    }
}

pub fn classify_point(cfg: &WaveConfig, p: &ModelParams, s: &ProfileState) -> Result<FaceClass, WaveError> {
    Ok(Wedge::new(p, cfg)?.classify(s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryCheck {
    pub face: FaceClass,
    pub y_dot: f64,
    /// `Z'/Y'`.
    pub slope: f64,
    pub points_out: bool,
}

/// On `P1` the field points out iff `Y' > 0` and `Z'/Y' < sigma1`; on `P2`
/// iff `Y' < 0` and `Z'/Y' < sigma2`.
pub fn boundary_vector_check(
    cfg: &WaveConfig,
    p: &ModelParams,
    s: &ProfileState,
) -> Result<BoundaryCheck, WaveError> {
    let wedge = Wedge::new(p, cfg)?;
    let face = wedge.classify(s);
    let f = profile_rhs(p, cfg, s);
    let slope = f.z / f.y;
    let points_out = match face {
        FaceClass::P1 => f.y > 0.0 && slope < wedge.sigma1,
        FaceClass::P2 => f.y < 0.0 && slope < wedge.sigma2,
        other => {
            return Err(WaveError::Precondition(format!(
                "point {s} lies on {other}, not on P1 or P2"
            )))
        }
    };
    Ok(BoundaryCheck {
        face,
        y_dot: f.y,
        slope,
        points_out,
    })
}

/// Rate of change of the face function of `face` along the flow. Negative
/// means the field points out of the wedge through that face, zero means the
/// face is invariant.
pub fn face_flux(cfg: &WaveConfig, p: &ModelParams, s: &ProfileState, face: FaceClass) -> Result<f64, WaveError> {
    let wedge = Wedge::new(p, cfg)?;
    let f = profile_rhs(p, cfg, s);
    Ok(match face {
        FaceClass::Q1 => f.x1,
        FaceClass::Q2 => -f.x1,
        FaceClass::Q3 => f.x2,
        FaceClass::Q4 => -f.x2,
        FaceClass::Q5 => f.y,
        FaceClass::P1 => f.z - wedge.sigma1 * f.y,
        FaceClass::P2 => wedge.sigma2 * f.y - f.z,
        other => {
            return Err(WaveError::Precondition(format!("{other} is not a face")))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::profile::wave_config;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (ModelParams, WaveConfig, Wedge) {
        let p = ModelParams::reference();
        let cfg = wave_config(&p, 1.5).unwrap();
        let w = Wedge::new(&p, &cfg).unwrap();
        (p, cfg, w)
    }

    #[test]
    fn exit_faces_and_interior() {
        let (p, cfg, w) = setup();
        let on = |z| classify_point(&cfg, &p, &ProfileState::new(0.5, 0.5, 1.0, z)).unwrap();
        assert_eq!(on(w.sigma1), FaceClass::P1);
        assert_eq!(on(w.sigma2), FaceClass::P2);
        assert_eq!(on(0.5 * (w.sigma1 + w.sigma2)), FaceClass::Interior);
        assert_eq!(on(0.5 * w.sigma1), FaceClass::Exterior);
        assert_eq!(on(2.0 * w.sigma2), FaceClass::Exterior);
    }

    #[test]
    fn q_faces_win_at_edges() {
        let (_, _, w) = setup();
        assert_eq!(w.classify(&ProfileState::new(0.0, 0.5, 1.0, w.sigma1)), FaceClass::Q1);
        assert_eq!(w.classify(&ProfileState::new(1.0, 0.5, 0.0, 0.0)), FaceClass::Q2);
        assert_eq!(w.classify(&ProfileState::new(0.5, 0.0, 1.0, 1.0)), FaceClass::Q3);
        assert_eq!(w.classify(&ProfileState::new(0.5, w.x2_max, 1.0, 1.0)), FaceClass::Q4);
        assert_eq!(w.classify(&ProfileState::new(0.5, 0.5, 0.0, 0.0)), FaceClass::Q5);
        assert_eq!(w.classify(&ProfileState::new(0.5, 0.5, -1.0, -1.0)), FaceClass::Exterior);
    }

    #[test]
    fn exit_faces_point_outward() {
        let (p, cfg, w) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let x1 = rng.random_range(1e-6..1.0 - 1e-6);
            let x2 = rng.random_range(1e-6..w.x2_max - 1e-6);
            let y = rng.random_range(1e-3..3.0);
            for sigma in [w.sigma1, w.sigma2] {
                let s = ProfileState::new(x1, x2, y, sigma * y);
                let chk = boundary_vector_check(&cfg, &p, &s).unwrap();
                assert!(chk.points_out, "{s}: {chk:?}");
                let flux = face_flux(&cfg, &p, &s, chk.face).unwrap();
                assert!(flux < 0.0);
            }
        }
    }

    #[test]
    fn q_faces_are_invariant_or_inward() {
        let (p, cfg, w) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let x1: f64 = rng.random_range(0.0..1.0);
            let x2 = rng.random_range(0.0..w.x2_max);
            let y = rng.random_range(1e-3..3.0);
            let z = y * rng.random_range(w.sigma1..w.sigma2);
            let q2 = ProfileState::new(1.0, x2, y, z);
            assert!(face_flux(&cfg, &p, &q2, FaceClass::Q2).unwrap() > 0.0);
            let q4 = ProfileState::new(x1.min(1.0 - 1e-9), w.x2_max, y, z);
            assert!(face_flux(&cfg, &p, &q4, FaceClass::Q4).unwrap() > 0.0);
            let q1 = ProfileState::new(0.0, x2, y, z);
            assert_eq!(face_flux(&cfg, &p, &q1, FaceClass::Q1).unwrap(), 0.0);
            let q3 = ProfileState::new(x1, 0.0, y, z);
            assert_eq!(face_flux(&cfg, &p, &q3, FaceClass::Q3).unwrap(), 0.0);
            let q5 = ProfileState::new(x1, x2, 0.0, 0.0);
            assert_eq!(face_flux(&cfg, &p, &q5, FaceClass::Q5).unwrap(), 0.0);
        }
    }

    #[test]
    fn boundary_check_rejects_non_exit_points() {
        let (p, cfg, _) = setup();
        let s = ProfileState::new(1.0, 0.5, 1.0, 0.9);
        assert!(matches!(
            boundary_vector_check(&cfg, &p, &s),
            Err(WaveError::Precondition(_))
        ));
    }

    #[test]
    fn subcritical_speed_has_no_wedge() {
        let p = ModelParams::reference();
        let cfg = wave_config(&p, 0.8).unwrap();
        assert!(classify_point(&cfg, &p, &ProfileState::default()).is_err());
    }
}
