//! Command-line front end: `trophwave [global options] <analyze|ode|pde|wave>`.
//!
//! Settings come from an optional TOML file (see [`config`]) and are
//! overridden by flags. Every run writes its outputs, the resolved
//! configuration and a metadata record into the output directory.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use trophwave_core::pde::solver::Scheme;
use trophwave_core::pde::FrontDirection;
use trophwave_core::wave::WaveLyapunovForm;

use crate::config::{load_config, resolve_params, RunConfig};
use crate::error::{exit, CliError};
use crate::output::OutputDir;

#[derive(Debug, Parser)]
#[command(name = "trophwave", version, about = "Predator-prey reaction-diffusion analysis and simulation")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for random sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Parameter override `name=value`, repeatable.
    #[arg(short = 'p', long = "param", global = true, value_name = "NAME=VALUE")]
    pub params: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibria, their stability and the global regime.
    Analyze,
    /// Integrate the reaction system.
    Ode(OdeArgs),
    /// Simulate the reaction-diffusion system on an interval.
    Pde(PdeArgs),
    /// Shoot for the traveling front from the prey-only state to coexistence.
    Wave(WaveArgs),
}

#[derive(Debug, Args)]
pub struct OdeArgs {
    /// Initial state `u,v,w`.
    #[arg(long, value_parser = parse_triple)]
    pub init: Option<[f64; 3]>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Extra random initial conditions.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PdeArgs {
    /// Built-in scenario 1, 2 or 3.
    #[arg(long, conflicts_with = "invasion")]
    pub scenario: Option<u32>,
    /// Prey-only state invaded from the left edge by both predators.
    #[arg(long)]
    pub invasion: bool,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub n_cells: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub output_every: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// `explicit-rk4` or `split`.
    #[arg(long, value_parser = parse_scheme)]
    pub scheme: Option<Scheme>,
    /// Measure the speed of the specialist front.
    #[arg(long)]
    pub front_speed: bool,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// `rightward` or `leftward`.
    #[arg(long, value_parser = parse_direction)]
    pub direction: Option<FrontDirection>,
    /// Comma-separated diffusion coefficients for an exploratory sweep.
    #[arg(long, value_delimiter = ',')]
    pub d_sweep: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct WaveArgs {
    /// Wave speed.
    #[arg(long)]
    pub c: Option<f64>,
    /// Distance of the initial curve from the prey-only state.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub z_tol: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// `equilibrium-shift` or `unit-shift`.
    #[arg(long, value_parser = parse_form)]
    pub lyapunov_form: Option<WaveLyapunovForm>,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected three values u,v,w, got {}", v.len()))
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    match s {
        "explicit-rk4" => Ok(Scheme::ExplicitRk4),
        "split" => Ok(Scheme::Split),
        _ => Err(format!("unknown scheme `{s}` (explicit-rk4, split)")),
    }
}

fn parse_direction(s: &str) -> Result<FrontDirection, String> {
    match s {
        "rightward" => Ok(FrontDirection::Rightward),
        "leftward" => Ok(FrontDirection::Leftward),
        _ => Err(format!("unknown direction `{s}` (rightward, leftward)")),
    }
}

fn parse_form(s: &str) -> Result<WaveLyapunovForm, String> {
    match s {
        "equilibrium-shift" => Ok(WaveLyapunovForm::EquilibriumShift),
        "unit-shift" => Ok(WaveLyapunovForm::UnitShift),
        _ => Err(format!("unknown form `{s}` (equilibrium-shift, unit-shift)")),
    }
}

/// Folds command-line flags into the file configuration.
pub fn apply_flags(cli: &Cli, cfg: &mut RunConfig) {
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match &cli.command {
        Command::Analyze => {}
        Command::Ode(a) => {
            set(&mut cfg.ode.init, a.init);
            set(&mut cfg.ode.t_end, a.t_end);
            set(&mut cfg.ode.samples, a.samples);
        }
        Command::Pde(a) => {
            if a.scenario.is_some() {
                cfg.pde.scenario = a.scenario;
                cfg.pde.invasion = false;
                cfg.pde.initial = None;
            }
            if a.invasion {
                cfg.pde.invasion = true;
                cfg.pde.scenario = None;
                cfg.pde.initial = None;
            }
            set(&mut cfg.pde.length, a.length);
            set(&mut cfg.pde.n_cells, a.n_cells);
            set(&mut cfg.pde.t_end, a.t_end);
            set(&mut cfg.pde.output_every, a.output_every);
            if a.dt.is_some() {
                cfg.pde.dt = a.dt;
            }
            set(&mut cfg.pde.scheme, a.scheme);
            cfg.pde.front_speed |= a.front_speed;
            set(&mut cfg.pde.threshold, a.threshold);
            set(&mut cfg.pde.direction, a.direction);
            set(&mut cfg.pde.d_sweep, a.d_sweep.clone());
        }
        Command::Wave(a) => {
            set(&mut cfg.wave.c, a.c);
            set(&mut cfg.wave.eps, a.eps);
            set(&mut cfg.wave.z_tol, a.z_tol);
            set(&mut cfg.wave.horizon, a.horizon);
            set(&mut cfg.wave.lyapunov_form, a.lyapunov_form);
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Runs a parsed command and returns the terminal summary.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    apply_flags(cli, &mut cfg);
    let rp = resolve_params(&cfg, &cli.params)?;
    let mut out = OutputDir::create(&cfg.output_dir)?;
    let mut summary = String::new();
    for note in rp.notes() {
        summary.push_str(&format!("note: {note}\n"));
    }
    summary.push_str(&match &cli.command {
        Command::Analyze => commands::cmd_analyze(&cfg, &rp, &mut out)?,
        Command::Ode(_) => commands::cmd_ode(&cfg, &rp, &mut out)?,
        Command::Pde(_) => commands::cmd_pde(&cfg, &rp, &mut out)?,
        Command::Wave(_) => commands::cmd_wave(&cfg, &rp, &mut out)?,
    });
    summary.push_str(&format!("outputs in {}\n", out.path().display()));
    Ok(summary)
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run_from_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            let _ = stdout.write_all(summary.as_bytes());
            exit::SUCCESS
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("trophwave").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config() {
        let cli = parse(&["--seed", "9", "-p", "d=0.5", "pde", "--scenario", "2", "--n-cells", "64", "--scheme", "split"]);
        let mut cfg = RunConfig::default();
        cfg.pde.invasion = true;
        apply_flags(&cli, &mut cfg);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.pde.scenario, Some(2));
        assert!(!cfg.pde.invasion);
        assert_eq!(cfg.pde.n_cells, 64);
        assert_eq!(cfg.pde.scheme, Scheme::Split);
        assert_eq!(cli.params, vec!["d=0.5".to_string()]);
    }

    #[test]
    fn ode_init_needs_three_values() {
        let cli = parse(&["ode", "--init", "0.1,0.2,0.3"]);
        let mut cfg = RunConfig::default();
        apply_flags(&cli, &mut cfg);
        assert_eq!(cfg.ode.init, [0.1, 0.2, 0.3]);
        assert!(Cli::try_parse_from(["trophwave", "ode", "--init", "0.1,0.2"]).is_err());
    }

    #[test]
    fn usage_errors_exit_one_and_help_exits_zero() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run_from_args(["trophwave", "bogus"], &mut o, &mut e), exit::USAGE);
        assert_eq!(run_from_args(["trophwave", "wave", "--lyapunov-form", "x"], &mut o, &mut e), exit::USAGE);
        assert_eq!(run_from_args(["trophwave", "--help"], &mut o, &mut e), exit::SUCCESS);
        assert!(String::from_utf8_lossy(&o).contains("analyze"));
    }
}
