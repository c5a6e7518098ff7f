//! Closed-form equilibria, local stability and the global regime table.

use std::fmt;

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::ModelError;
use crate::model::{check_assumptions, reaction_jacobian, AssumptionReport, ModelParams, OdeState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EquilibriumName {
    E0,
    E1,
    E2,
    E12,
    E13,
    Estar,
}

impl EquilibriumName {
    pub const ALL: [EquilibriumName; 6] = [
        EquilibriumName::E0,
        EquilibriumName::E1,
        EquilibriumName::E2,
        EquilibriumName::E12,
        EquilibriumName::E13,
        EquilibriumName::Estar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EquilibriumName::E0 => "E0",
            EquilibriumName::E1 => "E1",
            EquilibriumName::E2 => "E2",
            EquilibriumName::E12 => "E12",
            EquilibriumName::E13 => "E13",
            EquilibriumName::Estar => "Estar",
        }
    }
}

impl fmt::Display for EquilibriumName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Unstable,
    Saddle,
    LocallyStable,
    #[serde(rename = "GloballyStable-claimed")]
    GloballyStableClaimed,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Unstable => "Unstable",
            Verdict::Saddle => "Saddle",
            Verdict::LocallyStable => "LocallyStable",
            Verdict::GloballyStableClaimed => "GloballyStable-claimed",
        };
        f.write_str(s)
    }
}

fn serialize_eigs<S: Serializer>(
    eigs: &Option<[Complex64; 3]>,
    ser: S,
) -> Result<S::Ok, S::Error> {
    match eigs {
        Some(e) => {
            let pairs: Vec<[f64; 2]> = e.iter().map(|z| [z.re, z.im]).collect();
            pairs.serialize(ser)
        }
        None => ser.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub name: EquilibriumName,
    pub coords: OdeState,
    pub exists: bool,
    /// Filled in by [`classify_equilibrium`]; serialized as `[re, im]` pairs.
    #[serde(serialize_with = "serialize_eigs")]
    pub eigenvalues: Option<[Complex64; 3]>,
    pub verdict: Option<Verdict>,
}

impl Equilibrium {
    fn unclassified(name: EquilibriumName, coords: OdeState, exists: bool) -> Self {
        Self {
            name,
            coords,
            exists,
            eigenvalues: None,
            verdict: None,
        }
    }
}

/// `(u12, v12)`, the prey/generalist equilibrium without the specialist.
pub fn e12_coords(p: &ModelParams) -> (f64, f64) {
    let den = p.r1 * p.r2 + p.a12 * p.a21;
    (
        p.r2 * (p.r1 - p.a12) / den,
        (p.r1 * p.r2 + p.r1 * p.a21) / den,
    )
}

/// `(u13, w13)`, the prey/specialist equilibrium without the generalist.
pub fn e13_coords(p: &ModelParams) -> (f64, f64) {
    (p.mu / p.a31, p.r1 * (p.a31 - p.mu) / (p.a13 * p.a31))
}

/// Coordinates of the coexistence state (positive only under H3).
pub fn coexistence_coords(p: &ModelParams) -> OdeState {
    OdeState::new(
        p.mu / p.a31,
        1.0 + p.a21 * p.mu / (p.a31 * p.r2),
        crate::model::h3_expression(p) / (p.a13 * p.a31 * p.r2),
    )
}

pub fn compute_equilibria(p: &ModelParams) -> Vec<Equilibrium> {
    let h = check_assumptions(p);
    let (u12, v12) = e12_coords(p);
    let (u13, w13) = e13_coords(p);
    vec![
        Equilibrium::unclassified(EquilibriumName::E0, OdeState::new(0.0, 0.0, 0.0), true),
        Equilibrium::unclassified(EquilibriumName::E1, OdeState::new(1.0, 0.0, 0.0), true),
        Equilibrium::unclassified(EquilibriumName::E2, OdeState::new(0.0, 1.0, 0.0), true),
        Equilibrium::unclassified(EquilibriumName::E12, OdeState::new(u12, v12, 0.0), h.h1),
        Equilibrium::unclassified(EquilibriumName::E13, OdeState::new(u13, 0.0, w13), h.h2),
        Equilibrium::unclassified(EquilibriumName::Estar, coexistence_coords(p), h.h3),
    ]
}

pub fn equilibrium(p: &ModelParams, name: EquilibriumName) -> Equilibrium {
    compute_equilibria(p)
        .into_iter()
        .find(|e| e.name == name)
        .expect("all six equilibria are always listed")
}

/// Eigenvalues of a real 3x3 matrix, sorted by descending real part.
pub fn eigenvalues3(m: &Matrix3<f64>) -> [Complex64; 3] {
    let ev = m.complex_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2]];
    out.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    out
}

/// Routh-Hurwitz test for `l^3 + a2 l^2 + a1 l + a0`: all roots have
/// negative real part iff `a2 > 0`, `a0 > 0` and `a2 a1 > a0`.
pub fn routh_hurwitz_stable(a2: f64, a1: f64, a0: f64) -> bool {
    a2 > 0.0 && a0 > 0.0 && a2 * a1 > a0
}

/// Characteristic polynomial coefficients `(a2, a1, a0)` of a 3x3 matrix.
pub fn characteristic_coefficients(m: &Matrix3<f64>) -> (f64, f64, f64) {
    let trace = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    (-trace, minors, -m.determinant())
}

/// Attaches the numerical spectrum and a stability verdict.
///
/// Verdicts follow the local analysis: `E0`, `E1` unstable; `E2` stable iff
/// `r1 <= a12`; `E12` stable iff `mu > a31 u12` (otherwise a saddle);
/// `E13` a saddle; the coexistence state stable whenever it exists. An
/// equilibrium that is the attractor of the parameter set's regime is
/// upgraded to [`Verdict::GloballyStableClaimed`].
pub fn classify_equilibrium(p: &ModelParams, e: &Equilibrium) -> Result<Equilibrium, ModelError> {
    if !e.exists {
        return Err(ModelError::NonexistentEquilibrium(e.name));
    }
    let jac = reaction_jacobian(p, &e.coords)?;
    let eigs = eigenvalues3(&jac);
    let h = check_assumptions(p);
    let (u12, _) = e12_coords(p);
    let attractor = regime(p).regime.attractor();

    let local = match e.name {
        EquilibriumName::E0 | EquilibriumName::E1 => Verdict::Unstable,
        EquilibriumName::E2 if !h.h1 => Verdict::LocallyStable,
        EquilibriumName::E2 => Verdict::Saddle,
        EquilibriumName::E12 if p.mu > p.a31 * u12 => Verdict::LocallyStable,
        EquilibriumName::E12 => Verdict::Saddle,
        EquilibriumName::E13 => Verdict::Saddle,
        EquilibriumName::Estar => Verdict::LocallyStable,
    };
    let verdict = if e.name == attractor {
        Verdict::GloballyStableClaimed
    } else {
        local
    };
    Ok(Equilibrium {
        eigenvalues: Some(eigs),
        verdict: Some(verdict),
        ..e.clone()
    })
}

/// Every existing equilibrium, classified.
pub fn classify_all(p: &ModelParams) -> Vec<Equilibrium> {
    compute_equilibria(p)
        .iter()
        .map(|e| {
            if e.exists {
                classify_equilibrium(p, e).expect("existing equilibria classify")
            } else {
                e.clone()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "E2_GAS")]
    E2Gas,
    #[serde(rename = "E12_GAS")]
    E12Gas,
    #[serde(rename = "Estar_GAS")]
    EstarGas,
}

impl Regime {
    pub fn attractor(self) -> EquilibriumName {
        match self {
            Regime::E2Gas => EquilibriumName::E2,
            Regime::E12Gas => EquilibriumName::E12,
            Regime::EstarGas => EquilibriumName::Estar,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::E2Gas => "E2_GAS",
            Regime::E12Gas => "E12_GAS",
            Regime::EstarGas => "Estar_GAS",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeVerdict {
    pub regime: Regime,
    /// The inequalities that selected the regime, in readable form.
    pub witness: String,
    /// `a31 * u12`, the specialist invasion threshold at `E12`.
    pub threshold: f64,
}

/// Global regime of the reaction system. The three rows partition
/// parameter space; the tie `mu == a31 u12` belongs to `E12_GAS`.
pub fn regime(p: &ModelParams) -> RegimeVerdict {
    let (u12, _) = e12_coords(p);
    let threshold = p.a31 * u12;
    if p.r1 <= p.a12 {
        RegimeVerdict {
            regime: Regime::E2Gas,
            witness: format!("r1 = {} <= a12 = {}", p.r1, p.a12),
            threshold,
        }
    } else if p.mu >= threshold {
        RegimeVerdict {
            regime: Regime::E12Gas,
            witness: format!(
                "r1 = {} > a12 = {} and mu = {} >= a31*u12 = {}",
                p.r1, p.a12, p.mu, threshold
            ),
            threshold,
        }
    } else {
        RegimeVerdict {
            regime: Regime::EstarGas,
            witness: format!(
                "r1 = {} > a12 = {} and mu = {} < a31*u12 = {}",
                p.r1, p.a12, p.mu, threshold
            ),
            threshold,
        }
    }
}

/// Everything the `analyze` command reports.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub params: ModelParams,
    pub assumptions: AssumptionReport,
    pub equilibria: Vec<Equilibrium>,
    pub regime: RegimeVerdict,
}

pub fn analyze(p: &ModelParams) -> AnalysisReport {
    AnalysisReport {
        params: *p,
        assumptions: check_assumptions(p),
        equilibria: classify_all(p),
        regime: regime(p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rhs_array;
    use approx::assert_relative_eq;
    use nalgebra::{Matrix2, Vector2};

    fn count_signs(eigs: &[Complex64; 3], tol: f64) -> (usize, usize) {
        let pos = eigs.iter().filter(|z| z.re > tol).count();
        let neg = eigs.iter().filter(|z| z.re < -tol).count();
        (pos, neg)
    }

    #[test]
    fn reference_equilibria() {
        let p = ModelParams::reference();
        let eqs = compute_equilibria(&p);
        assert!(eqs.iter().all(|e| e.exists));
        let star = &eqs[5];
        assert_relative_eq!(star.coords.u, 0.3, epsilon = 1e-14);
        assert_relative_eq!(star.coords.v, 1.2, epsilon = 1e-14);
        assert_relative_eq!(star.coords.w, 0.62, epsilon = 1e-14);
        let e12 = &eqs[3];
        assert_relative_eq!(e12.coords.u, 0.6875, epsilon = 1e-14);
        assert_relative_eq!(e12.coords.v, 1.458_333_333_333_333, epsilon = 1e-13);
        assert_eq!(e12.coords.w, 0.0);
        for e in &eqs {
            let f = rhs_array(&p, &e.coords.to_array());
            assert!(f.iter().all(|x| x.abs() <= 1e-10), "{}: {f:?}", e.name);
        }
    }

    #[test]
    fn e12_closed_form_solves_its_linear_system() {
        // r1 u + a12 v = r1 ; a21 u - r2 v = -r2
        let p = ModelParams::reference();
        let m = Matrix2::new(p.r1, p.a12, p.a21, -p.r2);
        let sol = m.lu().solve(&Vector2::new(p.r1, -p.r2)).unwrap();
        let (u12, v12) = e12_coords(&p);
        assert_relative_eq!(sol[0], u12, epsilon = 1e-13);
        assert_relative_eq!(sol[1], v12, epsilon = 1e-13);
    }

    #[test]
    fn e13_uses_mu_over_a31() {
        let p = ModelParams::reference().with("a13", 0.9).unwrap();
        let (u13, w13) = e13_coords(&p);
        assert_relative_eq!(u13, p.mu / p.a31);
        assert_relative_eq!(p.r1 * (1.0 - u13), p.a13 * w13, epsilon = 1e-15);
    }

    #[test]
    fn weak_prey_has_no_interior_states() {
        let p = ModelParams::reference().with("r1", 0.1).unwrap();
        let eqs = compute_equilibria(&p);
        assert!(!eqs[3].exists);
        assert!(!eqs[5].exists);
        assert!(eqs[3].coords.u < 0.0);
        let err = classify_equilibrium(&p, &eqs[5]).unwrap_err();
        assert_eq!(err, ModelError::NonexistentEquilibrium(EquilibriumName::Estar));
    }

    #[test]
    fn origin_and_prey_state_spectra() {
        let p = ModelParams::reference();
        let eqs = classify_all(&p);
        let e0 = eqs[0].eigenvalues.unwrap();
        let re: Vec<f64> = e0.iter().map(|z| z.re).collect();
        assert_relative_eq!(re[0], 0.7, epsilon = 1e-12);
        assert_relative_eq!(re[1], 0.3, epsilon = 1e-12);
        assert_relative_eq!(re[2], -0.15, epsilon = 1e-12);
        assert_eq!(eqs[0].verdict, Some(Verdict::Unstable));

        let e1 = eqs[1].eigenvalues.unwrap();
        let re: Vec<f64> = e1.iter().map(|z| z.re).collect();
        assert_relative_eq!(re[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(re[1], 0.35, epsilon = 1e-12);
        assert_relative_eq!(re[2], -0.7, epsilon = 1e-12);
        assert_eq!(eqs[1].verdict, Some(Verdict::Unstable));
    }

    #[test]
    fn coexistence_state_is_the_attractor_for_reference_parameters() {
        let p = ModelParams::reference();
        let eqs = classify_all(&p);
        let star = &eqs[5];
        assert!(star.eigenvalues.unwrap().iter().all(|z| z.re < 0.0));
        assert_eq!(star.verdict, Some(Verdict::GloballyStableClaimed));
        assert_eq!(eqs[2].verdict, Some(Verdict::Saddle));
        assert_eq!(eqs[3].verdict, Some(Verdict::Saddle));
        assert_eq!(eqs[4].verdict, Some(Verdict::Saddle));

        let (a2, a1, a0) = characteristic_coefficients(
            &reaction_jacobian(&p, &star.coords).unwrap(),
        );
        assert!(routh_hurwitz_stable(a2, a1, a0));
    }

    #[test]
    fn e12_specialist_eigenvalue_matches_block_formula() {
        let p = ModelParams::reference();
        let e = classify_equilibrium(&p, &equilibrium(&p, EquilibriumName::E12)).unwrap();
        let (u12, _) = e12_coords(&p);
        let expected = -p.mu + p.a31 * u12;
        let eigs = e.eigenvalues.unwrap();
        assert!(eigs.iter().any(|z| (z.re - expected).abs() < 1e-12 && z.im == 0.0));
    }

    #[test]
    fn regimes_of_the_table() {
        let p = ModelParams::reference();
        let r = regime(&p);
        assert_eq!(r.regime, Regime::EstarGas);
        assert_relative_eq!(r.threshold, 0.34375, epsilon = 1e-15);

        let p2 = p.with("r1", 0.1).unwrap();
        assert_eq!(regime(&p2).regime, Regime::E2Gas);

        let p3 = p.with("mu", 0.4).unwrap();
        let r3 = regime(&p3);
        assert_eq!(r3.regime, Regime::E12Gas);
        assert!(p3.mu >= r3.threshold);
    }

    #[test]
    fn tie_case_belongs_to_e12_regime() {
        let p = ModelParams::reference();
        let (u12, _) = e12_coords(&p);
        let tie = p.with("mu", p.a31 * u12).unwrap();
        assert_eq!(regime(&tie).regime, Regime::E12Gas);
    }

    #[test]
    fn report_serializes_eigenvalue_pairs() {
        let rep = analyze(&ModelParams::reference());
        let text = serde_json::to_string(&rep).unwrap();
        assert!(text.contains("\"Estar_GAS\""));
        assert!(text.contains("\"GloballyStable-claimed\""));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        prop_compose! {
            fn any_params()(a in prop::array::uniform7(0.05f64..1.5)) -> ModelParams {
                ModelParams {
                    r1: a[0], r2: a[1], mu: a[2], a12: a[3], a13: a[4],
                    a21: a[5], a31: a[6], d: 1.0,
                }
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn existing_equilibria_are_steady(p in any_params()) {
                for e in compute_equilibria(&p).iter().filter(|e| e.exists) {
                    let f = rhs_array(&p, &e.coords.to_array());
                    prop_assert!(f.iter().all(|x| x.abs() <= 1e-10));
                    prop_assert!(e.coords.is_biological());
                }
            }

            #[test]
            fn sign_patterns_follow_local_analysis(p in any_params()) {
                let h = check_assumptions(&p);
                let eqs = classify_all(&p);
                let tol = 1e-9;
                // E0: two positive, one negative
                prop_assert_eq!(count_signs(&eqs[0].eigenvalues.unwrap(), tol), (2, 1));
                // E1: r2 + a21 > 0 always; a31 - mu sign depends on H2
                let e1 = count_signs(&eqs[1].eigenvalues.unwrap(), tol);
                if h.h2 { prop_assert_eq!(e1, (2, 1)); }
                if h.h1 {
                    prop_assert_eq!(count_signs(&eqs[2].eigenvalues.unwrap(), tol), (1, 2));
                    let (u12, _) = e12_coords(&p);
                    let lam3 = p.a31 * u12 - p.mu;
                    let e12 = count_signs(&eqs[3].eigenvalues.unwrap(), tol);
                    if lam3 > tol { prop_assert_eq!(e12, (1, 2)); }
                    if lam3 < -tol { prop_assert_eq!(e12, (0, 3)); }
                } else if p.r1 < p.a12 - tol {
                    prop_assert_eq!(count_signs(&eqs[2].eigenvalues.unwrap(), tol), (0, 3));
                }
                if h.h2 {
                    prop_assert_eq!(count_signs(&eqs[4].eigenvalues.unwrap(), tol), (1, 2));
                    prop_assert_eq!(eqs[4].verdict, Some(Verdict::Saddle));
                }
                if h.h3 {
                    let star = &eqs[5];
                    prop_assert_eq!(count_signs(&star.eigenvalues.unwrap(), 0.0), (0, 3));
                    let (a2, a1, a0) = characteristic_coefficients(
                        &reaction_jacobian(&p, &star.coords).unwrap());
                    prop_assert!(routh_hurwitz_stable(a2, a1, a0));
                }
            }

            #[test]
            fn exactly_one_regime_and_it_matches_existence(p in any_params()) {
                let r = regime(&p);
                let h = check_assumptions(&p);
                let fired = [
                    p.r1 <= p.a12,
                    p.r1 > p.a12 && p.mu >= r.threshold,
                    p.r1 > p.a12 && p.mu < r.threshold,
                ];
                prop_assert_eq!(fired.iter().filter(|b| **b).count(), 1);
                prop_assert_eq!(r.regime == Regime::EstarGas, h.h3);
            }
        }
    }
}
