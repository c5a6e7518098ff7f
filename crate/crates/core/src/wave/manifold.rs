//! Linearization of the profile system at the prey-only state and the
//! tangent-plane approximation of its three-dimensional unstable manifold.

use nalgebra::{Matrix3, Matrix4};
use num_complex::Complex64;
use serde::Serialize;

use super::profile::{discriminant, ProfileState, WaveConfig, CRITICAL_BAND};
use super::wedge::Wedge;
use crate::error::WaveError;
use crate::model::ModelParams;

/// Largest admissible `eps` for the shooting curve.
pub const MAX_EPS: f64 = 0.05;

/// Spectrum of the linearization at `(1, 0, 0, 0)`.
///
/// `lambda0 = -r1`, `lambda1 = r2 + a21` and
/// `lambda2,3 = (rho +- sqrt(rho^2 - 4 rho (a31 - mu))) / 2`; the latter two
/// are real and distinct above the minimal speed and a complex pair below
/// it. Eigenvectors:
///
/// ```text
/// h1 = (-a12/(lambda1 + r1), 1, 0, 0)
/// h2 = (-a13/(lambda2 + r1), 0, 1, (a31 - mu)/lambda2)
/// h3 = (-a13/(lambda3 + r1), 0, 1, (a31 - mu)/lambda3)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnstableSpectrum {
    pub lambda0: f64,
    pub lambda1: f64,
    #[serde(serialize_with = "ser_complex")]
    pub lambda2: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub lambda3: Complex64,
    pub h1: [f64; 4],
    #[serde(serialize_with = "ser_cvec")]
    pub h2: [Complex64; 4],
    #[serde(serialize_with = "ser_cvec")]
    pub h3: [Complex64; 4],
    /// `lambda2 == lambda3` (speed at the minimal speed).
    pub degenerate: bool,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn ser_cvec<S: serde::Serializer>(v: &[Complex64; 4], s: S) -> Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
    pairs.serialize(s)
}

impl UnstableSpectrum {
    pub fn is_real(&self) -> bool {
        self.lambda2.im == 0.0 && self.lambda3.im == 0.0
    }

    /// Real parts of `(lambda2, lambda3)`; meaningful as the eigenvalues
    /// only when [`is_real`](Self::is_real).
    pub fn real_pair(&self) -> (f64, f64) {
        (self.lambda2.re, self.lambda3.re)
    }
}

pub fn unstable_spectrum(p: &ModelParams, cfg: &WaveConfig) -> Result<UnstableSpectrum, WaveError> {
    p.validate()?;
    if p.a31 <= p.mu {
        return Err(WaveError::NoPersistence { a31: p.a31, mu: p.mu });
    }
    let rho = cfg.rho;
    let s = p.a31 - p.mu;
    let disc = discriminant(p, rho);
    let degenerate = disc.abs() <= CRITICAL_BAND * rho * rho;
    let root = if degenerate {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(disc, 0.0).sqrt()
    };
    let half = Complex64::new(0.5 * rho, 0.0);
    let lambda2 = half + 0.5 * root;
    let lambda3 = half - 0.5 * root;
    let lambda1 = p.r2 + p.a21;
    let r1 = Complex64::new(p.r1, 0.0);
    let vec_for = |lam: Complex64| {
        [
            -p.a13 / (lam + r1),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            s / lam,
        ]
    };
    Ok(UnstableSpectrum {
        lambda0: -p.r1,
        lambda1,
        lambda2,
        lambda3,
        h1: [-p.a12 / (lambda1 + p.r1), 1.0, 0.0, 0.0],
        h2: vec_for(lambda2),
        h3: vec_for(lambda3),
        degenerate,
    })
}

/// Jacobian of the profile system at `(1, 0, 0, 0)`.
pub fn prey_state_linearization(p: &ModelParams, rho: f64) -> Matrix4<f64> {
    Matrix4::new(
        -p.r1, -p.a12, -p.a13, 0.0,
        0.0, p.r2 + p.a21, 0.0, 0.0,
        0.0, 0.0, rho, -rho,
        0.0, 0.0, p.a31 - p.mu, 0.0,
    )
}

/// Matrix of the map `(k1, k2, k3) -> (x2, y, z)` between eigen-coordinates
/// and the last three coordinates of the tangent plane.
pub fn chart_matrix(p: &ModelParams, spec: &UnstableSpectrum) -> Result<Matrix3<f64>, WaveError> {
    let (l2, l3) = real_pair(spec)?;
    let s = p.a31 - p.mu;
    Ok(Matrix3::new(
        1.0, 0.0, 0.0,
        0.0, 1.0, 1.0,
        0.0, s / l2, s / l3,
    ))
}

fn real_pair(spec: &UnstableSpectrum) -> Result<(f64, f64), WaveError> {
    if !spec.is_real() || spec.degenerate {
        return Err(WaveError::Precondition(
            "tangent plane needs two distinct real unstable eigenvalues".into(),
        ));
    }
    Ok(spec.real_pair())
}

/// Point of the tangent plane of the unstable manifold over `(x2, y, z)`,
/// built from the eigenvectors: solve for the eigen-coordinates and read off
/// `x1 = 1 + k1 h1[0] + k2 h2[0] + k3 h3[0]`.
pub fn tangent_plane_point(
    p: &ModelParams,
    spec: &UnstableSpectrum,
    x2: f64,
    y: f64,
    z: f64,
) -> Result<ProfileState, WaveError> {
    let (l2, l3) = real_pair(spec)?;
    let s = p.a31 - p.mu;
    // k2 + k3 = y, k2 s/l2 + k3 s/l3 = z
    let (a, b) = (s / l2, s / l3);
    let k3 = (z - a * y) / (b - a);
    let k2 = y - k3;
    let k1 = x2;
    let x1 = 1.0 + k1 * spec.h1[0] + k2 * spec.h2[0].re + k3 * spec.h3[0].re;
    Ok(ProfileState::new(x1, x2, y, z))
}

/// Point of the shooting curve: the tangent-plane point over
/// `(eps, eps, z)` with `z` in `[sigma1 eps, sigma2 eps]`. The endpoints lie
/// on `P1` and `P2`; the nonlinear correction of the manifold is neglected.
pub fn gamma_point(
    p: &ModelParams,
    cfg: &WaveConfig,
    eps: f64,
    z: f64,
) -> Result<ProfileState, WaveError> {
    if !(eps > 0.0 && eps <= MAX_EPS) {
        return Err(WaveError::Precondition(format!(
            "eps = {eps} outside (0, {MAX_EPS}]; use a smaller eps"
        )));
    }
    let wedge = Wedge::new(p, cfg)?;
    let (lo, hi) = (wedge.sigma1 * eps, wedge.sigma2 * eps);
    if !(lo..=hi).contains(&z) {
        return Err(WaveError::Precondition(format!(
            "z = {z} outside [{lo}, {hi}]"
        )));
    }
    let spec = unstable_spectrum(p, cfg)?;
    tangent_plane_point(p, &spec, eps, eps, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::profile::wave_config;
    use crate::wave::wedge::FaceClass;
    use approx::assert_relative_eq;
    use nalgebra::Vector4;

    fn setup(c: f64) -> (ModelParams, WaveConfig, UnstableSpectrum) {
        let p = ModelParams::reference();
        let cfg = wave_config(&p, c).unwrap();
        let spec = unstable_spectrum(&p, &cfg).unwrap();
        (p, cfg, spec)
    }

    #[test]
    fn reference_spectrum() {
        let (p, _, spec) = setup(1.5);
        assert_eq!(spec.lambda0, -0.7);
        assert_relative_eq!(spec.lambda1, 0.5);
        assert!(spec.is_real());
        let (l2, l3) = spec.real_pair();
        // frozen from an independent numerical eigensolve of the 4x4 matrix
        assert_relative_eq!(l2, 1.816_465_834_296_966_6, epsilon = 1e-12);
        assert_relative_eq!(l3, 0.433_534_165_703_033_4, epsilon = 1e-12);
        assert_relative_eq!(l2 * l3, 2.25 * (p.a31 - p.mu), epsilon = 1e-14);
        assert!(l2 > l3 && l3 > 0.0);
    }

    #[test]
    fn eigenvalues_agree_with_numerical_eigensolve() {
        for c in [1.2, 1.5, 2.0, 3.0] {
            let (p, cfg, spec) = setup(c);
            let m = prey_state_linearization(&p, cfg.rho);
            let mut ev: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.re).collect();
            ev.sort_by(f64::total_cmp);
            let mut ours = vec![spec.lambda0, spec.lambda1, spec.lambda2.re, spec.lambda3.re];
            ours.sort_by(f64::total_cmp);
            for (a, b) in ev.iter().zip(&ours) {
                assert!((a - b).abs() < 1e-10, "c={c}: {ev:?} vs {ours:?}");
            }
        }
    }

    #[test]
    fn eigenvector_residuals() {
        let (p, cfg, spec) = setup(1.5);
        let m = prey_state_linearization(&p, cfg.rho);
        let h1 = Vector4::from(spec.h1);
        assert!((m * h1 - spec.lambda1 * h1).norm() <= 1e-10);
        for (lam, h) in [(spec.lambda2, spec.h2), (spec.lambda3, spec.h3)] {
            let h = Vector4::from(h.map(|z| z.re));
            assert!((m * h - lam.re * h).norm() <= 1e-10);
        }
    }

    #[test]
    fn subcritical_pair_is_complex_with_positive_real_part() {
        let (p, cfg, spec) = setup(0.8);
        assert!(!spec.is_real());
        assert!(spec.lambda2.re > 0.0 && spec.lambda3.re > 0.0);
        assert_eq!(spec.lambda2, spec.lambda3.conj());
        assert_relative_eq!(spec.lambda2.re, 0.32, epsilon = 1e-14);
        assert_relative_eq!(spec.lambda2.im.abs(), 0.348_711_915_483_254_4, epsilon = 1e-12);
        // complex eigenvectors still satisfy the eigen-equation
        let m = prey_state_linearization(&p, cfg.rho).map(|x| Complex64::new(x, 0.0));
        let h = Vector4::from(spec.h2);
        assert!((m * h - h * spec.lambda2).norm() <= 1e-10);
    }

    #[test]
    fn critical_speed_is_degenerate() {
        let p = ModelParams::reference();
        let cfg = wave_config(&p, crate::wave::profile::minimal_speed(&p)).unwrap();
        let spec = unstable_spectrum(&p, &cfg).unwrap();
        assert!(spec.degenerate);
        assert!(chart_matrix(&p, &spec).is_err());
    }

    #[test]
    fn chart_is_invertible_above_minimal_speed() {
        for c in [1.19, 1.3, 1.5, 2.0, 5.0] {
            let (p, _, spec) = setup(c);
            assert!(chart_matrix(&p, &spec).unwrap().determinant().abs() > 1e-12, "c={c}");
        }
    }

    #[test]
    fn eigenvector_route_matches_closed_form_plane() {
        // x1 = 1 - x2 a12/(l1 + r1)
        //        - a13 (l2 l3 z + r1 s y) / (s (l2 + r1)(l3 + r1))
        let (p, _, spec) = setup(1.5);
        let (l2, l3) = spec.real_pair();
        let s = p.a31 - p.mu;
        for (x2, y, z) in [(0.01, 0.01, 0.009), (0.0, 0.02, 0.017), (0.03, 0.001, 0.001)] {
            let pt = tangent_plane_point(&p, &spec, x2, y, z).unwrap();
            let closed = 1.0
                - x2 * p.a12 / (spec.lambda1 + p.r1)
                - p.a13 * (l2 * l3 * z + p.r1 * s * y) / (s * (l2 + p.r1) * (l3 + p.r1));
            assert_relative_eq!(pt.x1, closed, epsilon = 1e-14);
        }
    }

    #[test]
    fn gamma_endpoints_land_on_exit_faces() {
        let (p, cfg, _) = setup(1.5);
        let w = Wedge::new(&p, &cfg).unwrap();
        let eps = 0.01;
        let a = gamma_point(&p, &cfg, eps, w.sigma1 * eps).unwrap();
        let b = gamma_point(&p, &cfg, eps, w.sigma2 * eps).unwrap();
        assert_eq!(w.classify(&a), FaceClass::P1);
        assert_eq!(w.classify(&b), FaceClass::P2);
        let mid = gamma_point(&p, &cfg, eps, 0.5 * (w.sigma1 + w.sigma2) * eps).unwrap();
        assert_eq!(w.classify(&mid), FaceClass::Interior);
        assert!(0.0 < mid.x1 && mid.x1 < 1.0);
    }

    #[test]
    fn gamma_preconditions() {
        let (p, cfg, _) = setup(1.5);
        assert!(gamma_point(&p, &cfg, 0.5, 0.4).is_err());
        assert!(gamma_point(&p, &cfg, 0.01, 0.0).is_err());
        let slow = wave_config(&p, 0.8).unwrap();
        assert!(gamma_point(&p, &slow, 0.01, 0.009).is_err());
    }
}
