//! The four subcommands. Each writes its results plus the resolved config
//! and metadata into the output directory and returns a short summary for
//! the terminal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use trophwave_core::equilibria::{classify_all, coexistence_coords, Regime};
use trophwave_core::lyapunov::{LyapunovKind, PreyWeight};
use trophwave_core::ode::{
    check_bounds, detect_convergence, integrate, monitor_lyapunov, BoundsReport, MonotonicityReport, OdeOptions,
};
use trophwave_core::pde::front::front_speed;
use trophwave_core::pde::render::{heatmap_svg, profile_svg, species_csv, Species};
use trophwave_core::pde::solver::{run, RunOptions};
use trophwave_core::pde::{invasion_profiles, scenario_profiles, Grid1D, InitialProfiles};
use trophwave_core::wave::manifold::unstable_spectrum;
use trophwave_core::wave::shoot::{check_supercritical, profile_lyapunov, WaveLyapunovReport};
use trophwave_core::wave::{find_wave_with, minimal_speed, wave_config, FindWaveOptions, WaveLyapunovForm};
use trophwave_core::{analyze, EquilibriumName, FrontTrace, OdeError, OdeState};

use crate::config::{PdeSection, ResolvedParams, RunConfig};
use crate::error::CliError;
use crate::output::OutputDir;

pub fn cmd_analyze(cfg: &RunConfig, rp: &ResolvedParams, out: &mut OutputDir) -> Result<String, CliError> {
    let report = analyze(&rp.params);
    out.write_json("report.json", &report)?;
    out.write_provenance("analyze", cfg, rp)?;
    let mut s = format!("regime: {} ({})\n", report.regime.regime, report.regime.witness);
    for e in &report.equilibria {
        let verdict = match (e.exists, e.verdict) {
            (false, _) => "does not exist".to_string(),
            (true, Some(v)) => v.to_string(),
            (true, None) => "unclassified".to_string(),
        };
        s.push_str(&format!("{:>5}  {}  {}\n", e.name.as_str(), e.coords, verdict));
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
struct Convergence {
    init: OdeState,
    converged_to: Option<EquilibriumName>,
    time: Option<f64>,
    final_state: OdeState,
}

#[derive(Debug, Serialize)]
struct OdeSummary {
    regime: Regime,
    t_end: f64,
    steps: usize,
    main: Convergence,
    bounds: Option<BoundsReport>,
    lyapunov: Option<MonotonicityReport>,
    lyapunov_note: Option<String>,
    samples: Vec<Convergence>,
}

pub fn cmd_ode(cfg: &RunConfig, rp: &ResolvedParams, out: &mut OutputDir) -> Result<String, CliError> {
    let p = &rp.params;
    let o = &cfg.ode;
    if !(o.t_end > 0.0 && o.t_end.is_finite()) {
        return Err(CliError::Usage(format!("ode t_end must be positive, got {}", o.t_end)));
    }
    if !(o.convergence_eps > 0.0) {
        return Err(CliError::Usage("ode convergence_eps must be positive".into()));
    }
    let init = OdeState::from_array(o.init);
    if !init.is_biological() {
        return Err(CliError::Usage(format!("ode init must be finite and nonnegative, got {init}")));
    }
    let opts = OdeOptions { rtol: o.rtol, atol: o.atol, ..OdeOptions::default() };
    let targets: Vec<_> = classify_all(p).into_iter().filter(|e| e.exists).collect();
    let traj = match integrate(p, init, o.t_end, &opts) {
        Ok(t) => t,
        Err(OdeError::Stiff { source, partial }) => {
            out.write("trajectory.csv", &partial.to_csv())?;
            out.write_provenance("ode", cfg, rp)?;
            return Err(CliError::Numerical(format!("integration failed: {source} (partial trajectory written)")));
        }
        Err(e) => return Err(e.into()),
    };
    let converge = |traj: &trophwave_core::ode::Trajectory, init| {
        let hit = detect_convergence(traj, &targets, o.convergence_eps);
        Convergence {
            init,
            converged_to: hit.map(|h| h.0),
            time: hit.map(|h| h.1),
            final_state: traj.last().map(|l| l.1).unwrap_or(init),
        }
    };
    let regime = trophwave_core::regime(p).regime;
    let kind = match regime {
        Regime::EstarGas => Some(LyapunovKind::Vstar(PreyWeight::default())),
        Regime::E12Gas => Some(LyapunovKind::V12),
        Regime::E2Gas => None,
    };
    let (lyapunov, lyapunov_note) = match kind {
        None => (None, Some("no Lyapunov function is monitored in the E2_GAS regime".to_string())),
        Some(k) => match monitor_lyapunov(&traj, k, p) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    let bounds = check_bounds(&traj, p).ok();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::with_capacity(o.samples);
    for _ in 0..o.samples {
        let s0 = OdeState::new(
            rng.random_range(0.01..2.0),
            rng.random_range(0.01..2.0),
            rng.random_range(0.01..2.0),
        );
        let t = integrate(p, s0, o.t_end, &opts)?;
        samples.push(converge(&t, s0));
    }
    let summary = OdeSummary {
        regime,
        t_end: o.t_end,
        steps: traj.len() - 1,
        main: converge(&traj, init),
        bounds,
        lyapunov,
        lyapunov_note,
        samples,
    };
    out.write("trajectory.csv", &traj.to_csv())?;
    out.write_json("summary.json", &summary)?;
    out.write_provenance("ode", cfg, rp)?;

    let mut s = format!("regime: {regime}\n");
    match (summary.main.converged_to, summary.main.time) {
        (Some(name), Some(t)) => s.push_str(&format!(
            "converged to {name} (within {}) at t = {t}\n",
            o.convergence_eps
        )),
        _ => s.push_str(&format!("no convergence within {} by t = {}\n", o.convergence_eps, o.t_end)),
    }
    let last = summary.main.final_state;
    if last.u < 1e-5 && last.w < 1e-5 {
        s.push_str(&format!("extinction: u = {:e}, w = {:e} at t = {}\n", last.u, last.w, o.t_end));
    } else if last.w < 1e-5 {
        s.push_str(&format!("extinction: w = {:e} at t = {}\n", last.w, o.t_end));
    }
    if let Some(l) = &summary.lyapunov {
        s.push_str(&format!(
            "{:?} nonincreasing: {} (max relative increase {:e})\n",
            l.kind, l.pass, l.max_relative_increase
        ));
    }
    if !summary.samples.is_empty() {
        let hit = summary.samples.iter().filter(|c| c.converged_to.is_some()).count();
        s.push_str(&format!("{hit}/{} random starts converged\n", summary.samples.len()));
    }
    Ok(s)
}

fn initial_profiles(sec: &PdeSection) -> Result<(String, InitialProfiles), CliError> {
    let chosen = [sec.scenario.is_some(), sec.invasion, sec.initial.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if chosen > 1 {
        return Err(CliError::Config(
            "pde: give at most one of scenario, invasion and [pde.initial]".into(),
        ));
    }
    if let Some(init) = &sec.initial {
        return Ok(("custom".into(), init.clone()));
    }
    if sec.invasion {
        return Ok(("invasion".into(), invasion_profiles(sec.length, 0.05)));
    }
    let id = sec.scenario.unwrap_or(1);
    Ok((format!("scenario {id}"), scenario_profiles(id, sec.length)?))
}

#[derive(Debug, Serialize)]
struct SweepRow {
    d: f64,
    mean_w: f64,
    mean_w_right_half: f64,
}

#[derive(Debug, Serialize)]
struct PdeSummary {
    initial: String,
    dt: f64,
    snapshots: usize,
    clamp_events: usize,
    cell_steps: usize,
    terminal_distance_to_coexistence: f64,
    terminal_distance_left_half: f64,
    terminal_distance_right_half: f64,
    c_star: f64,
    front: Option<FrontTrace>,
    front_note: Option<String>,
    d_sweep: Vec<SweepRow>,
}

pub fn cmd_pde(cfg: &RunConfig, rp: &ResolvedParams, out: &mut OutputDir) -> Result<String, CliError> {
    let p = &rp.params;
    let sec = &cfg.pde;
    let grid = Grid1D::new(sec.length, sec.n_cells)?;
    let (label, profiles) = initial_profiles(sec)?;
    let f0 = profiles.discretize(grid)?;
    let opts = RunOptions {
        t_end: sec.t_end,
        output_every: sec.output_every,
        dt: sec.dt,
        scheme: sec.scheme,
        reactions: true,
    };
    let rec = run(p, &f0, &opts)?;
    let n = grid.n_cells;
    let e = coexistence_coords(p);
    let term = rec.terminal();
    let (front, front_note) = if sec.front_speed {
        match front_speed(&rec, sec.threshold, sec.direction) {
            Ok(tr) => (Some(tr), None),
            Err(err) => (None, Some(err.to_string())),
        }
    } else {
        (None, None)
    };
    let mut d_sweep = Vec::new();
    for &d in &sec.d_sweep {
        let q = p.with("d", d)?;
        let r = run(&q, &f0, &RunOptions { dt: None, ..opts })?;
        let w = &r.terminal().w;
        d_sweep.push(SweepRow {
            d,
            mean_w: w.iter().sum::<f64>() / n as f64,
            mean_w_right_half: w[n / 2..].iter().sum::<f64>() / (n - n / 2) as f64,
        });
    }
    let summary = PdeSummary {
        initial: label.clone(),
        dt: rec.dt,
        snapshots: rec.snapshots.len(),
        clamp_events: rec.clamp_events,
        cell_steps: rec.cell_steps,
        terminal_distance_to_coexistence: term.distance_to(e, 0..n),
        terminal_distance_left_half: term.distance_to(e, 0..n / 2),
        terminal_distance_right_half: term.distance_to(e, n / 2..n),
        c_star: minimal_speed(p),
        front,
        front_note,
        d_sweep,
    };

    for sp in Species::ALL {
        out.write(&format!("{}.csv", sp.name()), &species_csv(&rec, sp))?;
        out.write(&format!("{}.svg", sp.name()), &heatmap_svg(&rec, sp, 300, 400))?;
    }
    out.write("initial.svg", &profile_svg(&rec.snapshots[0], &format!("initial profiles ({label})")))?;
    if let Some(tr) = &summary.front {
        let mut csv = String::from("t,position\n");
        for (t, x) in tr.times.iter().zip(&tr.positions) {
            csv.push_str(&format!("{t},{x}\n"));
        }
        out.write("front.csv", &csv)?;
    }
    if !summary.d_sweep.is_empty() {
        let mut csv = String::from("d,mean_w,mean_w_right_half\n");
        for r in &summary.d_sweep {
            csv.push_str(&format!("{},{},{}\n", r.d, r.mean_w, r.mean_w_right_half));
        }
        out.write("d_sweep.csv", &csv)?;
    }
    out.write_json("summary.json", &summary)?;
    out.write_provenance("pde", cfg, rp)?;

    let mut s = format!(
        "{label}: {} cells, t_end = {}, dt = {:e}, {} snapshots\n",
        n, sec.t_end, rec.dt, summary.snapshots
    );
    s.push_str(&format!(
        "terminal sup distance to coexistence state: {:e}\n",
        summary.terminal_distance_to_coexistence
    ));
    if let Some(tr) = &summary.front {
        s.push_str(&format!(
            "front speed {:.4} (R^2 {:.5}, threshold {}), c* = {:.4}, relative difference {:+.2}%\n",
            tr.speed,
            tr.r_squared,
            tr.threshold,
            summary.c_star,
            100.0 * (tr.speed - summary.c_star) / summary.c_star
        ));
    }
    if let Some(note) = &summary.front_note {
        s.push_str(&format!("front speed unavailable: {note}\n"));
    }
    Ok(s)
}

#[derive(Debug, Serialize)]
struct WaveRecord {
    #[serde(flatten)]
    metadata: trophwave_core::wave::WaveMetadata,
    final_verdict: trophwave_core::ShotVerdict,
    bracket: (f64, f64),
    shots: usize,
    min_distance: f64,
    lyapunov: WaveLyapunovReport,
    lyapunov_other_form: WaveLyapunovReport,
    spectrum: trophwave_core::wave::UnstableSpectrum,
    scan: Vec<(f64, trophwave_core::ShotVerdict)>,
}

#[derive(Debug, Serialize)]
struct Refusal {
    refused: bool,
    c: f64,
    c_star: f64,
    spectrum: Option<trophwave_core::wave::UnstableSpectrum>,
    reason: String,
}

pub fn cmd_wave(cfg: &RunConfig, rp: &ResolvedParams, out: &mut OutputDir) -> Result<String, CliError> {
    let p = &rp.params;
    let w = &cfg.wave;
    let wc = wave_config(p, w.c)?;
    if let Err(err) = check_supercritical(p, &wc) {
        let refusal = Refusal {
            refused: true,
            c: wc.c,
            c_star: wc.c_star,
            spectrum: unstable_spectrum(p, &wc).ok(),
            reason: err.to_string(),
        };
        out.write_json("wave.json", &refusal)?;
        out.write_provenance("wave", cfg, rp)?;
        return Err(err.into());
    }
    let opts = FindWaveOptions {
        eps: w.eps,
        z_tol: w.z_tol,
        horizon: w.horizon,
        lyapunov_form: w.lyapunov_form,
        ..FindWaveOptions::default()
    };
    let sol = find_wave_with(p, &wc, &opts)?;
    let other = match w.lyapunov_form {
        WaveLyapunovForm::EquilibriumShift => WaveLyapunovForm::UnitShift,
        WaveLyapunovForm::UnitShift => WaveLyapunovForm::EquilibriumShift,
    };
    let record = WaveRecord {
        metadata: sol.metadata(),
        final_verdict: sol.final_verdict,
        bracket: sol.bracket,
        shots: sol.shots,
        min_distance: sol.min_distance,
        lyapunov: sol.lyapunov,
        lyapunov_other_form: profile_lyapunov(p, &wc, &sol.trajectory, other)?,
        spectrum: unstable_spectrum(p, &wc)?,
        scan: sol.scan.clone(),
    };
    out.write("profile.csv", &sol.trajectory.to_csv())?;
    out.write_json("wave.json", &record)?;
    out.write_provenance("wave", cfg, rp)?;
    let s = format!(
        "c = {}, c* = {:.6}, z* = {:.12e}, tail distance {:.3e}, L nonincreasing: {}, certified: {}\n",
        wc.c, wc.c_star, sol.z_star, sol.tail_distance, sol.lyapunov.nonincreasing, sol.certified
    );
    if !sol.certified {
        return Err(CliError::Numerical(format!("wave not certified\n{s}")));
    }
    Ok(s)
}

