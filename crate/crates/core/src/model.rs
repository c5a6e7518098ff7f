//! Model parameters, the reaction vector field and its Jacobian.
//!
//! The reaction system is
//!
//! ```text
//! u' = r1 u (1 - u) - a12 u v - a13 u w
//! v' = r2 v (1 - v) + a21 u v
//! w' = -mu w + a31 u w
//! ```
//!
//! where `u` is the prey, `v` a generalist predator with its own logistic
//! growth and `w` a specialist predator feeding only on `u`. In the spatial
//! model only `w` diffuses, with coefficient `d`.

use std::fmt;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Diffusion coefficient used when a parameter file omits `d`.
pub const DEFAULT_DIFFUSION: f64 = 1.0;

/// Interaction and rate constants of the three-species model.
///
/// Construct through [`ModelParams::new`] (or a parameter file) so that the
/// positivity and finiteness invariants are checked once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub r1: f64,
    pub r2: f64,
    pub mu: f64,
    pub a12: f64,
    pub a13: f64,
    pub a21: f64,
    pub a31: f64,
    pub d: f64,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r1: f64,
        r2: f64,
        mu: f64,
        a12: f64,
        a13: f64,
        a21: f64,
        a31: f64,
        d: f64,
    ) -> Result<Self, ModelError> {
        let p = Self {
            r1,
            r2,
            mu,
            a12,
            a13,
            a21,
            a31,
            d,
        };
        p.validate()?;
        Ok(p)
    }

    /// The parameter set used for the invasion simulations
    /// (r1=0.7, r2=0.3, mu=0.15, a12=0.15, a13=0.5, a21=0.2, a31=0.5, d=1).
    pub fn reference() -> Self {
        Self {
            r1: 0.7,
            r2: 0.3,
            mu: 0.15,
            a12: 0.15,
            a13: 0.5,
            a21: 0.2,
            a31: 0.5,
            d: DEFAULT_DIFFUSION,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, value) in self.named_fields() {
            if !value.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
            if value <= 0.0 {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason: "must be strictly positive",
                });
            }
        }
        Ok(())
    }

    pub fn named_fields(&self) -> [(&'static str, f64); 8] {
        [
            ("r1", self.r1),
            ("r2", self.r2),
            ("mu", self.mu),
            ("a12", self.a12),
            ("a13", self.a13),
            ("a21", self.a21),
            ("a31", self.a31),
            ("d", self.d),
        ]
    }

    /// Copy with a single field replaced, validated.
    pub fn with(&self, name: &str, value: f64) -> Result<Self, ModelError> {
        let mut p = *self;
        let slot = match name {
            "r1" => &mut p.r1,
            "r2" => &mut p.r2,
            "mu" => &mut p.mu,
            "a12" => &mut p.a12,
            "a13" => &mut p.a13,
            "a21" => &mut p.a21,
            "a31" => &mut p.a31,
            "d" => &mut p.d,
            other => return Err(ModelError::UnknownParameter(other.to_string())),
        };
        *slot = value;
        p.validate()?;
        Ok(p)
    }

    /// Upper bound on `v` in the absorbing region, `1 + a21/r2`.
    pub fn v_ceiling(&self) -> f64 {
        1.0 + self.a21 / self.r2
    }
}

/// Parameter-file schema. Every key except `d` is mandatory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub r1: f64,
    pub r2: f64,
    pub mu: f64,
    pub a12: f64,
    pub a13: f64,
    pub a21: f64,
    pub a31: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

/// Result of resolving a [`ParamsSpec`]; `d_defaulted` tells the caller to
/// announce that the diffusion coefficient fell back to
/// [`DEFAULT_DIFFUSION`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadedParams {
    pub params: ModelParams,
    pub d_defaulted: bool,
}

impl ParamsSpec {
    pub fn resolve(&self) -> Result<LoadedParams, ModelError> {
        let params = ModelParams::new(
            self.r1,
            self.r2,
            self.mu,
            self.a12,
            self.a13,
            self.a21,
            self.a31,
            self.d.unwrap_or(DEFAULT_DIFFUSION),
        )?;
        Ok(LoadedParams {
            params,
            d_defaulted: self.d.is_none(),
        })
    }
}

impl From<ModelParams> for ParamsSpec {
    fn from(p: ModelParams) -> Self {
        Self {
            r1: p.r1,
            r2: p.r2,
            mu: p.mu,
            a12: p.a12,
            a13: p.a13,
            a21: p.a21,
            a31: p.a31,
            d: Some(p.d),
        }
    }
}

/// Parses a flat TOML parameter file (`r1 = 0.7` ...).
pub fn load_params_toml(text: &str) -> Result<LoadedParams, ModelError> {
    let spec: ParamsSpec =
        toml::from_str(text).map_err(|e| ModelError::Config(e.to_string()))?;
    spec.resolve()
}

/// A point `(u, v, w)` of the reaction phase space.
///
/// Components are allowed to be negative so that root finders and
/// integrators can probe; [`OdeState::is_biological`] tells the two apart.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OdeState {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl OdeState {
    pub const fn new(u: f64, v: f64, w: f64) -> Self {
        Self { u, v, w }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.w.is_finite()
    }

    pub fn is_biological(&self) -> bool {
        self.is_finite() && self.u >= 0.0 && self.v >= 0.0 && self.w >= 0.0
    }

    /// Sup-norm distance.
    pub fn distance(&self, other: &OdeState) -> f64 {
        (self.u - other.u)
            .abs()
            .max((self.v - other.v).abs())
            .max((self.w - other.w).abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.u.abs().max(self.v.abs()).max(self.w.abs())
    }
}

impl fmt::Display for OdeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.u, self.v, self.w)
    }
}

fn ensure_finite(s: &OdeState) -> Result<(), ModelError> {
    if s.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidState(*s))
    }
}

/// Reaction terms of the well-mixed system.
pub fn reaction_rhs(p: &ModelParams, s: &OdeState) -> Result<OdeState, ModelError> {
    ensure_finite(s)?;
    Ok(OdeState::from_array(rhs_array(p, &s.to_array())))
}

/// Unchecked array form of [`reaction_rhs`] used in the integrators' inner
/// loops. Each component is written as `x * (...)` so a vanishing species
/// stays exactly zero.
#[inline]
pub fn rhs_array(p: &ModelParams, y: &[f64; 3]) -> [f64; 3] {
    let [u, v, w] = *y;
    [
        u * (p.r1 * (1.0 - u) - p.a12 * v - p.a13 * w),
        v * (p.r2 * (1.0 - v) + p.a21 * u),
        w * (-p.mu + p.a31 * u),
    ]
}

pub fn reaction_jacobian(p: &ModelParams, s: &OdeState) -> Result<Matrix3<f64>, ModelError> {
    ensure_finite(s)?;
    let OdeState { u, v, w } = *s;
    Ok(Matrix3::new(
        p.r1 - 2.0 * p.r1 * u - p.a12 * v - p.a13 * w,
        -p.a12 * u,
        -p.a13 * u,
        p.a21 * v,
        p.r2 - 2.0 * p.r2 * v + p.a21 * u,
        0.0,
        p.a31 * w,
        0.0,
        -p.mu + p.a31 * u,
    ))
}

/// Flags for the standing assumptions.
///
/// * `h1`: `r1 > a12`, the prey survives the generalist.
/// * `h2`: `a31 > mu`, the specialist can persist on the prey.
/// * `h3`: `r1 r2 a31 - r1 r2 mu - a12 a31 r2 - a12 a21 mu > 0`, the
///   coexistence state is positive. Implies `h1` and `h2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
    pub h3_value: f64,
}

pub fn h3_expression(p: &ModelParams) -> f64 {
    p.r1 * p.r2 * p.a31 - p.r1 * p.r2 * p.mu - p.a12 * p.a31 * p.r2 - p.a12 * p.a21 * p.mu
}

pub fn check_assumptions(p: &ModelParams) -> AssumptionReport {
    let h3_value = h3_expression(p);
    AssumptionReport {
        h1: p.r1 > p.a12,
        h2: p.a31 > p.mu,
        h3: h3_value > 0.0,
        h3_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd_jacobian(p: &ModelParams, s: &OdeState, h: f64) -> Matrix3<f64> {
        let mut j = Matrix3::zeros();
        let base = s.to_array();
        for col in 0..3 {
            let mut plus = base;
            let mut minus = base;
            plus[col] += h;
            minus[col] -= h;
            let fp = rhs_array(p, &plus);
            let fm = rhs_array(p, &minus);
            for row in 0..3 {
                j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
            }
        }
        j
    }

    #[test]
    fn rhs_vanishes_at_trivial_states() {
        let p = ModelParams::reference();
        for s in [OdeState::new(0.0, 0.0, 0.0), OdeState::new(1.0, 0.0, 0.0)] {
            let f = reaction_rhs(&p, &s).unwrap();
            assert_eq!(f, OdeState::new(0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn rhs_vanishes_at_coexistence_point() {
        let p = ModelParams::reference();
        let f = reaction_rhs(&p, &OdeState::new(0.3, 1.2, 0.62)).unwrap();
        assert!(f.max_abs() <= 1e-12, "{f}");
    }

    #[test]
    fn rhs_rejects_non_finite_state() {
        let p = ModelParams::reference();
        let err = reaction_rhs(&p, &OdeState::new(f64::NAN, 0.0, 0.0)).unwrap_err();
        assert!(matches!(err, ModelError::InvalidState(_)));
        assert!(reaction_jacobian(&p, &OdeState::new(0.0, f64::INFINITY, 0.0)).is_err());
    }

    #[test]
    fn negative_states_are_evaluated_formally() {
        let p = ModelParams::reference();
        let s = OdeState::new(-0.1, 0.5, 0.2);
        assert!(reaction_rhs(&p, &s).is_ok());
        assert!(!s.is_biological());
    }

    #[test]
    fn jacobian_at_origin_and_prey_only_state() {
        let p = ModelParams::reference();
        let j0 = reaction_jacobian(&p, &OdeState::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(j0, Matrix3::from_diagonal(&[p.r1, p.r2, -p.mu].into()));

        let j1 = reaction_jacobian(&p, &OdeState::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(j1.row(0).iter().copied().collect::<Vec<_>>(), vec![-p.r1, -p.a12, -p.a13]);
        assert_eq!(j1[(1, 1)], p.r2 + p.a21);
        assert_eq!(j1[(2, 2)], -p.mu + p.a31);
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let p = ModelParams::reference();
        let s = OdeState::new(0.3, 1.2, 0.62);
        let j = reaction_jacobian(&p, &s).unwrap();
        let fd = fd_jacobian(&p, &s, 1e-6);
        assert_eq!(j[(1, 2)], 0.0);
        assert_eq!(j[(2, 1)], 0.0);
        for (a, b) in j.iter().zip(fd.iter()) {
            assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn assumptions_for_reference_parameters() {
        let rep = check_assumptions(&ModelParams::reference());
        assert!(rep.h1 && rep.h2 && rep.h3);
        assert_relative_eq!(rep.h3_value, 0.0465, epsilon = 1e-15);
    }

    #[test]
    fn assumption_boundaries_are_strict() {
        let p = ModelParams::reference();
        let rep = check_assumptions(&p.with("r1", p.a12).unwrap());
        assert!(!rep.h1 && !rep.h3);
        let rep = check_assumptions(&p.with("a31", p.mu).unwrap());
        assert!(!rep.h2 && !rep.h3);
        // -r2 a12 a31 - a12 a21 mu once a31 = mu
        let expected = -p.r2 * p.a12 * p.mu - p.a12 * p.a21 * p.mu;
        assert_relative_eq!(rep.h3_value, expected, epsilon = 1e-15);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(ModelParams::new(0.0, 0.3, 0.15, 0.15, 0.5, 0.2, 0.5, 1.0).is_err());
        assert!(ModelParams::new(0.7, 0.3, f64::NAN, 0.15, 0.5, 0.2, 0.5, 1.0).is_err());
        assert!(ModelParams::reference().with("d", -1.0).is_err());
        assert!(ModelParams::reference().with("zeta", 1.0).is_err());
    }

    #[test]
    fn parameter_file_requires_every_key_but_d() {
        let full = "r1 = 0.7\nr2 = 0.3\nmu = 0.15\na12 = 0.15\na13 = 0.5\na21 = 0.2\na31 = 0.5\n";
        let loaded = load_params_toml(full).unwrap();
        assert!(loaded.d_defaulted);
        assert_eq!(loaded.params, ModelParams::reference());

        let with_d = format!("{full}d = 2.5\n");
        let loaded = load_params_toml(&with_d).unwrap();
        assert!(!loaded.d_defaulted);
        assert_eq!(loaded.params.d, 2.5);

        let missing = full.replace("a31 = 0.5\n", "");
        let err = load_params_toml(&missing).unwrap_err().to_string();
        assert!(err.contains("a31"), "{err}");

        let unknown = format!("{full}a99 = 1.0\n");
        assert!(load_params_toml(&unknown).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = ModelParams> {
            prop::array::uniform8(0.01f64..2.0).prop_map(|a| ModelParams {
                r1: a[0],
                r2: a[1],
                mu: a[2],
                a12: a[3],
                a13: a[4],
                a21: a[5],
                a31: a[6],
                d: a[7],
            })
        }

        proptest! {
            #[test]
            fn jacobian_agrees_with_finite_differences(
                p in params(),
                s in prop::array::uniform3(0.0f64..2.0),
            ) {
                let s = OdeState::from_array(s);
                let j = reaction_jacobian(&p, &s).unwrap();
                let fd = fd_jacobian(&p, &s, 1e-6);
                for (a, b) in j.iter().zip(fd.iter()) {
                    prop_assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()));
                }
            }

            #[test]
            fn coordinate_planes_are_invariant(
                p in params(),
                s in prop::array::uniform3(0.0f64..2.0),
                which in 0usize..3,
            ) {
                let mut y = s;
                y[which] = 0.0;
                prop_assert_eq!(rhs_array(&p, &y)[which], 0.0);
            }

            #[test]
            fn h3_implies_h1_and_h2(p in params()) {
                let rep = check_assumptions(&p);
                prop_assert!(!rep.h3 || (rep.h1 && rep.h2));
            }
        }
    }
}
