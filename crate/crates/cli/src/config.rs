//! Run configuration: a TOML file with one table per command, overridden by
//! command-line flags.
//!
//! ```toml
//! output_dir = "out"
//! seed = 7
//!
//! [params]        # optional; the reference set is used when absent
//! r1 = 0.7
//! r2 = 0.3
//! mu = 0.15
//! a12 = 0.15
//! a13 = 0.5
//! a21 = 0.2
//! a31 = 0.5
//! d = 1.0         # optional, defaults to 1.0
//!
//! [ode]
//! init = [0.2, 0.1, 0.08]
//! t_end = 2000.0
//!
//! [pde]
//! scenario = 1
//! n_cells = 200
//!
//! [wave]
//! c = 1.5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trophwave_core::model::DEFAULT_DIFFUSION;
use trophwave_core::pde::solver::Scheme;
use trophwave_core::pde::{FrontDirection, InitialProfiles};
use trophwave_core::wave::WaveLyapunovForm;
use trophwave_core::{ModelParams, ParamsSpec};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSpec>,
    #[serde(default)]
    pub ode: OdeSection,
    #[serde(default)]
    pub pde: PdeSection,
    #[serde(default)]
    pub wave: WaveSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: default_output_dir(),
            seed: 0,
            params: None,
            ode: OdeSection::default(),
            pde: PdeSection::default(),
            wave: WaveSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeSection {
    pub init: [f64; 3],
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Radius for convergence detection.
    pub convergence_eps: f64,
    /// Additional random positive initial conditions drawn with `seed`.
    pub samples: usize,
}

impl Default for OdeSection {
    fn default() -> Self {
        Self {
            init: [0.2, 0.1, 0.08],
            t_end: 2000.0,
            rtol: 1e-10,
            atol: 1e-12,
            convergence_eps: 1e-4,
            samples: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeSection {
    /// Scenario 1, 2 or 3; ignored when `initial` or `invasion` is given.
    pub scenario: Option<u32>,
    /// Prey-only state invaded from the left by both predators.
    pub invasion: bool,
    /// Custom piecewise-constant initial profiles.
    pub initial: Option<InitialProfiles>,
    pub length: f64,
    pub n_cells: usize,
    pub t_end: f64,
    pub output_every: f64,
    pub dt: Option<f64>,
    pub scheme: Scheme,
    pub front_speed: bool,
    pub threshold: f64,
    pub direction: FrontDirection,
    /// Diffusion coefficients for an exploratory sweep of the same run.
    pub d_sweep: Vec<f64>,
}

impl Default for PdeSection {
    fn default() -> Self {
        Self {
            scenario: None,
            invasion: false,
            initial: None,
            length: 10.0,
            n_cells: 200,
            t_end: 300.0,
            output_every: 1.0,
            dt: None,
            scheme: Scheme::ExplicitRk4,
            front_speed: false,
            threshold: 0.05,
            direction: FrontDirection::Rightward,
            d_sweep: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveSection {
    pub c: f64,
    pub eps: f64,
    pub z_tol: f64,
    pub horizon: f64,
    pub lyapunov_form: WaveLyapunovForm,
}

impl Default for WaveSection {
    fn default() -> Self {
        Self {
            c: 1.5,
            eps: 0.01,
            z_tol: 1e-12,
            horizon: 500.0,
            lyapunov_form: WaveLyapunovForm::EquilibriumShift,
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Parameters after defaults and overrides, with provenance notes.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedParams {
    pub params: ModelParams,
    pub d_defaulted: bool,
    pub reference_used: bool,
}

impl ResolvedParams {
    pub fn notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if self.reference_used {
            notes.push("no [params] given: using the reference parameter set".to_string());
        }
        if self.d_defaulted {
            notes.push(format!("diffusion coefficient d not given: using default d = {DEFAULT_DIFFUSION}"));
        }
        notes
    }
}

/// Applies `name=value` overrides to the configured (or reference)
/// parameters.
pub fn resolve_params(cfg: &RunConfig, overrides: &[String]) -> Result<ResolvedParams, CliError> {
    let (mut params, mut d_defaulted, reference_used) = match &cfg.params {
        Some(spec) => {
            let loaded = spec.resolve()?;
            (loaded.params, loaded.d_defaulted, false)
        }
        None => (ModelParams::reference(), false, true),
    };
    for item in overrides {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("parameter override `{item}` is not name=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("parameter override `{item}`: value is not a number")))?;
        params = params.with(name.trim(), value)?;
        if name.trim() == "d" {
            d_defaulted = false;
        }
    }
    Ok(ResolvedParams { params, d_defaulted, reference_used })
}

/// The configuration as it was actually run: parameters filled in.
pub fn resolved_config(cfg: &RunConfig, params: &ModelParams) -> RunConfig {
    RunConfig { params: Some(ParamsSpec::from(*params)), ..cfg.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let r = resolve_params(&cfg, &[]).unwrap();
        assert_eq!(r.params, ModelParams::reference());
        assert!(r.reference_used);
    }

    #[test]
    fn missing_key_is_named() {
        let text = "[params]\nr1 = 0.7\nr2 = 0.3\nmu = 0.15\na12 = 0.15\na13 = 0.5\na21 = 0.2\n";
        let cfg = parse_config(text).unwrap_err();
        assert!(cfg.to_string().contains("a31"), "{cfg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config("[wave]\nspeed = 2.0\n").unwrap_err();
        assert!(err.to_string().contains("speed"), "{err}");
    }

    #[test]
    fn d_default_is_flagged_and_overridable() {
        let text = "[params]\nr1 = 0.7\nr2 = 0.3\nmu = 0.15\na12 = 0.15\na13 = 0.5\na21 = 0.2\na31 = 0.5\n";
        let cfg = parse_config(text).unwrap();
        let r = resolve_params(&cfg, &[]).unwrap();
        assert!(r.d_defaulted);
        assert_eq!(r.params.d, 1.0);
        assert!(r.notes().iter().any(|n| n.contains("d = 1")));
        let r = resolve_params(&cfg, &["d=0.5".into(), "r1 = 0.1".into()]).unwrap();
        assert!(!r.d_defaulted);
        assert_eq!((r.params.d, r.params.r1), (0.5, 0.1));
    }

    #[test]
    fn bad_overrides() {
        let cfg = RunConfig::default();
        assert!(matches!(resolve_params(&cfg, &["r1".into()]), Err(CliError::Usage(_))));
        assert!(matches!(resolve_params(&cfg, &["r1=x".into()]), Err(CliError::Usage(_))));
        assert!(matches!(resolve_params(&cfg, &["q=1".into()]), Err(CliError::Config(_))));
        assert!(matches!(resolve_params(&cfg, &["r1=-1".into()]), Err(CliError::Config(_))));
    }

    #[test]
    fn resolved_config_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.pde.initial = Some(trophwave_core::pde::scenario_profiles(2, 10.0).unwrap());
        let full = resolved_config(&cfg, &ModelParams::reference());
        let text = toml::to_string(&full).unwrap();
        assert_eq!(parse_config(&text).unwrap(), full);
    }
}
