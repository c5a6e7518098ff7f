//! Shooting from the unstable manifold of the prey-only state.
//!
//! Points of the curve `gamma` near `P1` leave the wedge through `P1`, points
//! near `P2` through `P2`; a point in between whose orbit never leaves is a
//! traveling front. [`find_wave`] brackets the verdict change by scanning,
//! bisects it down to machine precision and then keeps refining the bracket
//! along the orbit (edge tracking): the coexistence lift is a saddle of the
//! profile system, so a single machine-precision bracket only follows the
//! connecting orbit for a bounded time.

use std::fmt::Write as _;

use serde::Serialize;

use super::lyapunov::{wave_lyapunov_with, WaveLyapunovForm};
use super::manifold::{gamma_point, unstable_spectrum, MAX_EPS};
use super::profile::{coexistence_lift, profile_rhs_array, ProfileState, WaveConfig};
use super::wedge::{FaceClass, Wedge, FACE_TOL};
use crate::equilibria::coexistence_coords;
use crate::error::WaveError;
use crate::model::{check_assumptions, ModelParams};
use crate::ode::dopri::{Admissible, DenseStep, Dopri5, StepperOptions};
use crate::ode::MONOTONICITY_TOL;

pub const DEFAULT_HORIZON: f64 = 500.0;
/// Number of uniform samples of `gamma` scanned before bisection.
pub const SCAN_SAMPLES: usize = 64;
/// Distance to the coexistence lift at which a shot counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Tail distance required for certification.
pub const TAIL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ShotVerdict {
    ExitP1,
    ExitP2,
    /// Left through a `Q` face; impossible for interior starts.
    ExitOther,
    StayedToHorizon,
    ConvergedEstar,
}

impl ShotVerdict {
    pub fn is_exit(self) -> bool {
        matches!(self, ShotVerdict::ExitP1 | ShotVerdict::ExitP2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotOptions {
    pub horizon: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Accuracy of located face crossings, in face-function units.
    pub root_tol: f64,
    pub convergence_tol: f64,
}

impl Default for ShotOptions {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            rtol: 1e-12,
            atol: 1e-14,
            root_tol: 1e-10,
            convergence_tol: CONVERGENCE_TOL,
        }
    }
}

/// Sampled profile orbit; `t` is the rescaled profile time.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ProfileTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ProfileState>,
}

impl ProfileTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&ProfileState> {
        self.states.last()
    }

    pub fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x1,x2,y,z\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = writeln!(out, "{t},{},{},{},{}", s.x1, s.x2, s.y, s.z);
        }
        out
    }

    fn push(&mut self, t: f64, s: ProfileState) {
        self.times.push(t);
        self.states.push(s);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotOutcome {
    pub verdict: ShotVerdict,
    pub exit_time: Option<f64>,
    /// Face through which the orbit left, if it did.
    pub exit_face: Option<FaceClass>,
    pub final_state: ProfileState,
    pub trajectory: ProfileTrajectory,
    dense: Vec<DenseStep<4>>,
}

impl ShotOutcome {
    /// Dense-output state at `t`, if `t` lies within the integrated span.
    pub fn at(&self, t: f64) -> Option<ProfileState> {
        let first = self.dense.first()?;
        if t < first.t0 || t > self.dense.last()?.t1 {
            return None;
        }
        let i = self.dense.partition_point(|d| d.t1 < t);
        let step = &self.dense[i.min(self.dense.len() - 1)];
        Some(ProfileState::from_array(step.eval(t)))
    }
}

/// Integrates the profile system from `start` until it leaves the wedge,
/// converges to the coexistence lift or reaches `horizon`.
pub fn shoot(
    p: &ModelParams,
    cfg: &WaveConfig,
    start: ProfileState,
    horizon: f64,
) -> Result<ShotOutcome, WaveError> {
    shoot_with(p, cfg, start, &ShotOptions { horizon, ..ShotOptions::default() })
}

pub fn shoot_with(
    p: &ModelParams,
    cfg: &WaveConfig,
    start: ProfileState,
    opts: &ShotOptions,
) -> Result<ShotOutcome, WaveError> {
    let wedge = Wedge::new(p, cfg)?;
    if !(opts.horizon > 0.0 && opts.horizon.is_finite()) {
        return Err(WaveError::Precondition(format!("horizon must be positive, got {}", opts.horizon)));
    }
    if wedge.classify(&start) == FaceClass::Exterior {
        return Err(WaveError::Precondition(format!("start {start} lies outside the wedge")));
    }
    let target = coexistence_lift(p);
    let rho = cfg.rho;
    let mut f = |_t: f64, y: &[f64; 4]| profile_rhs_array(p, rho, y);
    let stepper_opts = StepperOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: 1e-3,
        h_max: 1.0,
        ..StepperOptions::default()
    };
    let mut st = Dopri5::new(&mut f, 0.0, start.to_array(), stepper_opts);
    let mut traj = ProfileTrajectory::default();
    traj.push(0.0, start);
    let mut dense = Vec::new();

    loop {
        if start.distance(&target) <= opts.convergence_tol && traj.len() == 1 {
            return Ok(finish(ShotVerdict::ConvergedEstar, None, None, traj, dense));
        }
        let step = st.step(&mut f, opts.horizon, |_| Admissible::Yes)?;
        let end = ProfileState::from_array(step.y1);
        if let Some((face, t_exit, s_exit)) = locate_exit(&wedge, &step, opts.root_tol) {
            traj.push(t_exit, s_exit);
            dense.push(step);
            let verdict = match face {
                FaceClass::P1 => ShotVerdict::ExitP1,
                FaceClass::P2 => ShotVerdict::ExitP2,
                _ => ShotVerdict::ExitOther,
            };
            return Ok(finish(verdict, Some(t_exit), Some(face), traj, dense));
        }
        traj.push(step.t1, end);
        let t1 = step.t1;
        dense.push(step);
        if end.distance(&target) <= opts.convergence_tol {
            return Ok(finish(ShotVerdict::ConvergedEstar, None, None, traj, dense));
        }
        if t1 >= opts.horizon {
            return Ok(finish(ShotVerdict::StayedToHorizon, None, None, traj, dense));
        }
    }
}

fn finish(
    verdict: ShotVerdict,
    exit_time: Option<f64>,
    exit_face: Option<FaceClass>,
    trajectory: ProfileTrajectory,
    dense: Vec<DenseStep<4>>,
) -> ShotOutcome {
    ShotOutcome {
        verdict,
        exit_time,
        exit_face,
        final_state: *trajectory.last().expect("trajectory holds the start"),
        trajectory,
        dense,
    }
}

/// Earliest face whose function drops below `-FACE_TOL` within the step,
/// located by bisection on the dense output.
fn locate_exit(
    wedge: &Wedge,
    step: &DenseStep<4>,
    root_tol: f64,
) -> Option<(FaceClass, f64, ProfileState)> {
    let end = wedge.face_functions(&ProfileState::from_array(step.y1));
    let mut best: Option<(FaceClass, f64, ProfileState)> = None;
    for (k, (face, g_end)) in end.iter().enumerate() {
        if *g_end >= -FACE_TOL {
            continue;
        }
        let g = |t: f64| wedge.face_functions(&ProfileState::from_array(step.eval(t)))[k].1;
        let (mut lo, mut hi) = (step.t0, step.t1);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let gm = g(mid);
            if gm >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if gm.abs() <= root_tol {
                hi = mid;
                break;
            }
        }
        if best.as_ref().is_none_or(|b| hi < b.1) {
            best = Some((*face, hi, ProfileState::from_array(step.eval(hi))));
        }
    }
    best
}

/// Result of [`find_wave`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveSolution {
    pub config: WaveConfig,
    pub eps: f64,
    /// Point of `gamma` (its `z` coordinate) on the `P1` side of the final
    /// bracket.
    pub z_star: f64,
    pub bracket: (f64, f64),
    /// `(z, verdict)` of the initial scan.
    pub scan: Vec<(f64, ShotVerdict)>,
    /// Bracket refinements performed along the orbit.
    pub refinements: usize,
    pub shots: usize,
    pub trajectory: ProfileTrajectory,
    pub final_verdict: ShotVerdict,
    pub tail_distance: f64,
    pub min_distance: f64,
    pub lyapunov: WaveLyapunovReport,
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveLyapunovReport {
    pub form: WaveLyapunovForm,
    pub initial: f64,
    pub final_value: f64,
    pub max_increase: f64,
    pub max_relative_increase: f64,
    pub nonincreasing: bool,
}

/// Companion record of an exported profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveMetadata {
    pub c: f64,
    pub c_star: f64,
    pub rho: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub z_star: f64,
    pub eps: f64,
    pub certified: bool,
    pub tail_distance: f64,
    pub refinements: usize,
    pub lyapunov_nonincreasing: bool,
}

impl WaveSolution {
    pub fn metadata(&self) -> WaveMetadata {
        WaveMetadata {
            c: self.config.c,
            c_star: self.config.c_star,
            rho: self.config.rho,
            sigma1: self.config.sigma1.unwrap_or(f64::NAN),
            sigma2: self.config.sigma2,
            z_star: self.z_star,
            eps: self.eps,
            certified: self.certified,
            tail_distance: self.tail_distance,
            refinements: self.refinements,
            lyapunov_nonincreasing: self.lyapunov.nonincreasing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FindWaveOptions {
    pub eps: f64,
    pub z_tol: f64,
    pub horizon: f64,
    /// Separation of the two bracketing orbits that triggers a refinement.
    pub separation: f64,
    pub lyapunov_form: WaveLyapunovForm,
}

impl Default for FindWaveOptions {
    fn default() -> Self {
        Self {
            eps: 0.01,
            z_tol: 1e-12,
            horizon: DEFAULT_HORIZON,
            separation: 1e-9,
            lyapunov_form: WaveLyapunovForm::EquilibriumShift,
        }
    }
}

/// Checks that shooting is meaningful for `cfg`, returning the typed refusal
/// for slow or critical speeds.
pub fn check_supercritical(p: &ModelParams, cfg: &WaveConfig) -> Result<(), WaveError> {
    if cfg.critical {
        return Err(WaveError::Degenerate { c: cfg.c, c_star: cfg.c_star });
    }
    if cfg.subcritical {
        let spec = unstable_spectrum(p, cfg)?;
        return Err(WaveError::Subcritical {
            c: cfg.c,
            c_star: cfg.c_star,
            lambda2: spec.lambda2,
            lambda3: spec.lambda3,
        });
    }
    Ok(())
}

pub fn find_wave(
    p: &ModelParams,
    cfg: &WaveConfig,
    eps: f64,
    z_tol: f64,
    horizon: f64,
) -> Result<WaveSolution, WaveError> {
    find_wave_with(p, cfg, &FindWaveOptions { eps, z_tol, horizon, ..FindWaveOptions::default() })
}

struct Shooter<'a> {
    p: &'a ModelParams,
    cfg: &'a WaveConfig,
    opts: ShotOptions,
    count: usize,
}

impl Shooter<'_> {
    fn shoot(&mut self, start: ProfileState, horizon: f64) -> Result<ShotOutcome, WaveError> {
        self.count += 1;
        let out = shoot_with(self.p, self.cfg, start, &ShotOptions { horizon, ..self.opts })?;
        if out.verdict == ShotVerdict::ExitOther {
            return Err(WaveError::QFaceExit {
                face: out.exit_face.map(|f| f.to_string()).unwrap_or_default(),
                time: out.exit_time.unwrap_or(f64::NAN),
            });
        }
        Ok(out)
    }
}

pub fn find_wave_with(
    p: &ModelParams,
    cfg: &WaveConfig,
    o: &FindWaveOptions,
) -> Result<WaveSolution, WaveError> {
    p.validate()?;
    check_supercritical(p, cfg)?;
    let h3 = check_assumptions(p);
    if !h3.h3 {
        return Err(WaveError::NoCoexistence(h3.h3_value));
    }
    if !(o.eps > 0.0 && o.eps <= MAX_EPS) {
        return Err(WaveError::Precondition(format!(
            "eps = {} outside (0, {MAX_EPS}]; use a smaller eps",
            o.eps
        )));
    }
    if !(o.z_tol > 0.0) || !(o.horizon > 0.0) || !(o.separation > 0.0) {
        return Err(WaveError::Precondition(
            "z_tol, horizon and separation must be positive".into(),
        ));
    }
    let wedge = Wedge::new(p, cfg)?;
    let mut sh = Shooter { p, cfg, opts: ShotOptions::default(), count: 0 };
    let (z_lo, z_hi) = (wedge.sigma1 * o.eps, wedge.sigma2 * o.eps);

    // scan
    let mut scan = Vec::with_capacity(SCAN_SAMPLES);
    for i in 0..SCAN_SAMPLES {
        let z = if i + 1 == SCAN_SAMPLES {
            z_hi
        } else {
            z_lo + (z_hi - z_lo) * i as f64 / (SCAN_SAMPLES - 1) as f64
        };
        let out = sh.shoot(gamma_point(p, cfg, o.eps, z)?, o.horizon)?;
        scan.push((z, out.verdict));
    }
    let bracket_at = scan.windows(2).position(|w| {
        w[0].1 != w[1].1 || !w[0].1.is_exit()
    });
    let Some(i) = bracket_at else {
        return Err(WaveError::NoBracket(format!("{:?}", scan[0].1)));
    };
    let (mut lo, mut hi) = (scan[i].0, scan[i + 1].0);
    let v_lo = scan[i].1;

    // bisection on z, continued to machine precision
    let mut settled = !v_lo.is_exit();
    if settled {
        hi = lo;
    }
    while !settled {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = sh.shoot(gamma_point(p, cfg, o.eps, mid)?, o.horizon)?.verdict;
        if v == v_lo {
            lo = mid;
        } else if v.is_exit() {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
            settled = true;
        }
    }
    if hi - lo > o.z_tol {
        return Err(WaveError::Precondition(format!(
            "bracket width {} cannot reach z_tol = {}",
            hi - lo,
            o.z_tol
        )));
    }
    let z_star = lo;

    // follow the orbit, refining the bracket whenever the two sides separate
    let mut pa = gamma_point(p, cfg, o.eps, lo)?;
    let mut pb = gamma_point(p, cfg, o.eps, hi)?;
    let mut offset = 0.0;
    let mut traj = ProfileTrajectory::default();
    let mut refinements = 0;
    let final_verdict;
    loop {
        let remaining = o.horizon - offset;
        let a = sh.shoot(pa, remaining)?;
        if !a.verdict.is_exit() || pa == pb {
            append(&mut traj, &a.trajectory, offset, a.trajectory.t_end());
            final_verdict = a.verdict;
            break;
        }
        let b = sh.shoot(pb, remaining)?;
        if !b.verdict.is_exit() {
            append(&mut traj, &b.trajectory, offset, b.trajectory.t_end());
            final_verdict = b.verdict;
            break;
        }
        let t_sep = separation_time(&a, &b, o.separation);
        if t_sep <= 0.0 {
            // no progress possible: report the lower orbit as it is
            append(&mut traj, &a.trajectory, offset, a.trajectory.t_end());
            final_verdict = a.verdict;
            break;
        }
        append(&mut traj, &a.trajectory, offset, t_sep);
        offset += t_sep;
        let qa = a.at(t_sep).expect("separation time lies in the span");
        let qb = b.at(t_sep).expect("separation time lies in the span");
        if qa.distance(&coexistence_lift(p)) <= CONVERGENCE_TOL {
            final_verdict = ShotVerdict::ConvergedEstar;
            break;
        }
        if offset >= o.horizon {
            final_verdict = ShotVerdict::StayedToHorizon;
            break;
        }
        (pa, pb) = bisect_segment(&mut sh, qa, qb, v_lo, o.horizon - offset)?;
        refinements += 1;
    }

    let target = coexistence_lift(p);
    let t_end = traj.t_end();
    let tail_distance = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t >= 0.9 * t_end)
        .map(|(_, s)| s.distance(&target))
        .fold(0.0, f64::max);
    let min_distance = traj.states.iter().map(|s| s.distance(&target)).fold(f64::INFINITY, f64::min);
    let lyapunov = lyapunov_report(p, cfg, &traj, o.lyapunov_form)?;
    let certified = tail_distance <= TAIL_TOL && lyapunov.nonincreasing;
    Ok(WaveSolution {
        config: *cfg,
        eps: o.eps,
        z_star,
        bracket: (lo, hi),
        scan,
        refinements,
        shots: sh.count,
        trajectory: traj,
        final_verdict,
        tail_distance,
        min_distance,
        lyapunov,
        certified,
    })
}

/// Appends the samples of `part` with `t <= until`, shifted by `offset`.
fn append(traj: &mut ProfileTrajectory, part: &ProfileTrajectory, offset: f64, until: f64) {
    let skip_first = !traj.is_empty();
    for (k, (t, s)) in part.times.iter().zip(&part.states).enumerate() {
        if k == 0 && skip_first {
            continue;
        }
        if *t > until {
            break;
        }
        traj.push(offset + t, *s);
    }
}

/// Last sample time of `a` up to which `b` stays within `delta` (sup norm).
fn separation_time(a: &ShotOutcome, b: &ShotOutcome, delta: f64) -> f64 {
    let horizon = a.trajectory.t_end().min(b.trajectory.t_end());
    let mut last = 0.0;
    for (t, s) in a.trajectory.times.iter().zip(&a.trajectory.states) {
        if *t > horizon {
            break;
        }
        match b.at(*t) {
            Some(q) if q.distance(s) <= delta => last = *t,
            _ => break,
        }
    }
    last
}

/// Bisects the segment `[qa, qb]` (verdict `v_lo` at `qa`) until its ends
/// are adjacent floating-point points.
fn bisect_segment(
    sh: &mut Shooter<'_>,
    qa: ProfileState,
    qb: ProfileState,
    v_lo: ShotVerdict,
    horizon: f64,
) -> Result<(ProfileState, ProfileState), WaveError> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let point = |m: f64| qa + (qb - qa) * m;
    let (mut a, mut b) = (qa, qb);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let q = point(mid);
        if q == a || q == b {
            break;
        }
        let v = sh.shoot(q, horizon)?.verdict;
        if v == v_lo {
            lo = mid;
            a = q;
        } else if v.is_exit() {
            hi = mid;
            b = q;
        } else {
            return Ok((q, q));
        }
    }
    Ok((a, b))
}

fn lyapunov_report(
    p: &ModelParams,
    cfg: &WaveConfig,
    traj: &ProfileTrajectory,
    form: WaveLyapunovForm,
) -> Result<WaveLyapunovReport, WaveError> {
    let values = traj
        .states
        .iter()
        .map(|s| wave_lyapunov_with(p, cfg, s, form).map(|l| l.value))
        .collect::<Result<Vec<_>, _>>()?;
    let mut max_increase: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    for w in values.windows(2) {
        let inc = w[1] - w[0];
        max_increase = max_increase.max(inc);
        max_rel = max_rel.max(inc / (1.0 + w[0].abs()));
    }
    Ok(WaveLyapunovReport {
        form,
        initial: values.first().copied().unwrap_or(f64::NAN),
        final_value: values.last().copied().unwrap_or(f64::NAN),
        max_increase,
        max_relative_increase: max_rel,
        nonincreasing: max_rel <= MONOTONICITY_TOL,
    })
}

/// Lyapunov report of an existing profile under another form of `L`.
pub fn profile_lyapunov(
    p: &ModelParams,
    cfg: &WaveConfig,
    traj: &ProfileTrajectory,
    form: WaveLyapunovForm,
) -> Result<WaveLyapunovReport, WaveError> {
    lyapunov_report(p, cfg, traj, form)
}

/// Coexistence lift as an `(X1, X2, Y, Z)` array, for reporting.
pub fn wave_target(p: &ModelParams) -> [f64; 4] {
    let e = coexistence_coords(p);
    [e.u, e.v, e.w, e.w]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wave::profile::{prey_only_lift, wave_config};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(c: f64) -> (ModelParams, WaveConfig, Wedge) {
        let p = ModelParams::reference();
        let cfg = wave_config(&p, c).unwrap();
        let w = Wedge::new(&p, &cfg).unwrap();
        (p, cfg, w)
    }

    #[test]
    fn gamma_endpoints_exit_through_their_faces() {
        let (p, cfg, w) = setup(1.5);
        let eps = 0.01;
        let a = shoot(&p, &cfg, gamma_point(&p, &cfg, eps, w.sigma1 * eps).unwrap(), 500.0).unwrap();
        assert_eq!(a.verdict, ShotVerdict::ExitP1);
        assert!(a.exit_time.unwrap() < 1.0);
        let b = shoot(&p, &cfg, gamma_point(&p, &cfg, eps, w.sigma2 * eps).unwrap(), 500.0).unwrap();
        assert_eq!(b.verdict, ShotVerdict::ExitP2);
    }

    #[test]
    fn equilibrium_start_converges_trivially() {
        let (p, cfg, _) = setup(1.5);
        let out = shoot(&p, &cfg, coexistence_lift(&p), 10.0).unwrap();
        assert_eq!(out.verdict, ShotVerdict::ConvergedEstar);
        assert_eq!(out.final_state, coexistence_lift(&p));
    }

    #[test]
    fn prey_only_lift_stays() {
        let (p, cfg, _) = setup(1.5);
        let out = shoot(&p, &cfg, prey_only_lift(), 10.0).unwrap();
        assert_eq!(out.verdict, ShotVerdict::StayedToHorizon);
        assert_eq!(out.final_state, prey_only_lift());
    }

    #[test]
    fn exit_points_lie_on_the_face() {
        let (p, cfg, w) = setup(1.5);
        let start = gamma_point(&p, &cfg, 0.01, 0.01 * (0.9 * w.sigma2 + 0.1 * w.sigma1)).unwrap();
        let out = shoot(&p, &cfg, start, 500.0).unwrap();
        assert!(out.verdict.is_exit());
        let s = out.final_state;
        let g = match out.verdict {
            ShotVerdict::ExitP1 => s.z - w.sigma1 * s.y,
            _ => w.sigma2 * s.y - s.z,
        };
        assert!(g.abs() <= 1e-10, "{g}");
    }

    #[test]
    fn interior_orbits_never_leave_through_q_faces() {
        let (p, cfg, w) = setup(1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let y = rng.random_range(1e-3..3.0);
            let s = ProfileState::new(
                rng.random_range(1e-3..1.0 - 1e-3),
                rng.random_range(1e-3..w.x2_max - 1e-3),
                y,
                y * rng.random_range(w.sigma1 + 1e-6..w.sigma2 - 1e-6),
            );
            let out = shoot(&p, &cfg, s, 100.0).unwrap();
            assert_ne!(out.verdict, ShotVerdict::ExitOther, "{s}: {:?}", out.exit_face);
        }
    }

    #[test]
    fn dense_output_reproduces_samples() {
        let (p, cfg, w) = setup(2.0);
        let start = gamma_point(&p, &cfg, 0.01, 0.01 * 0.5 * (w.sigma1 + w.sigma2)).unwrap();
        let out = shoot(&p, &cfg, start, 50.0).unwrap();
        for (t, s) in out.trajectory.times.iter().zip(&out.trajectory.states).take(50) {
            assert!(out.at(*t).unwrap().distance(s) < 1e-12);
        }
        assert!(out.at(-1.0).is_none());
    }

    #[test]
    fn slow_speed_profiles_change_sign() {
        // below the minimal speed the unstable directions rotate, so Y
        // turns negative before reaching any rest state
        let p = ModelParams::reference();
        let cfg = wave_config(&p, 0.8).unwrap();
        let spec = unstable_spectrum(&p, &cfg).unwrap();
        let h = spec.h2.map(|z| z.re);
        let start = [1.0 + 1e-4 * h[0], 0.0, 1e-4 * h[2], 1e-4 * h[3]];
        let mut f = |_t: f64, y: &[f64; 4]| profile_rhs_array(&p, cfg.rho, y);
        let mut st = Dopri5::new(&mut f, 0.0, start, StepperOptions::default());
        let mut min_y: f64 = f64::INFINITY;
        while st.t() < 30.0 {
            st.step(&mut f, 30.0, |_| Admissible::Yes).unwrap();
            min_y = min_y.min(st.y()[2]);
        }
        assert!(min_y < 0.0);
        assert!(matches!(check_supercritical(&p, &cfg), Err(WaveError::Subcritical { .. })));
    }

    #[test]
    fn refuses_bad_requests() {
        let (p, cfg, _) = setup(1.5);
        assert!(matches!(find_wave(&p, &cfg, 0.1, 1e-12, 500.0), Err(WaveError::Precondition(_))));
        let slow = wave_config(&p, 0.8).unwrap();
        assert!(matches!(find_wave(&p, &slow, 0.01, 1e-12, 500.0), Err(WaveError::Subcritical { .. })));
        let crit = wave_config(&p, cfg.c_star).unwrap();
        assert!(matches!(find_wave(&p, &crit, 0.01, 1e-12, 500.0), Err(WaveError::Degenerate { .. })));
    }

    #[test]
    fn csv_header_and_rows() {
        let mut t = ProfileTrajectory::default();
        t.push(0.0, ProfileState::new(1.0, 0.0, 0.0, 0.0));
        t.push(0.5, ProfileState::new(0.9, 0.1, 0.2, 0.3));
        let csv = t.to_csv();
        assert_eq!(csv.lines().next(), Some("t,x1,x2,y,z"));
        assert_eq!(csv.lines().nth(2), Some("0.5,0.9,0.1,0.2,0.3"));
    }
}
