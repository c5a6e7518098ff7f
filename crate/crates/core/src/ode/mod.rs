//! Integration of the reaction system and the trajectory monitors built on
//! top of it: absorbing-region bounds, convergence detection and Lyapunov
//! monotonicity.

pub mod dopri;

use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::equilibria::{compute_equilibria, Equilibrium, EquilibriumName};
use crate::error::{ModelError, OdeError};
use crate::lyapunov::{self, LyapunovKind};
use crate::model::{rhs_array, ModelParams, OdeState};

pub use dopri::{Admissible, DenseStep, Dopri5, StepperOptions};

/// Undershoot below this is rejected; between it and zero it is clamped.
pub const NEGATIVITY_FLOOR: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Radius of the neighbourhoods whose entry/exit is logged as events.
    pub proximity_eps: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            proximity_eps: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EventTag {
    /// A component undershot zero by less than the floor and was reset.
    Clamp { component: char, value: f64 },
    Enter(EquilibriumName),
    Leave(EquilibriumName),
}

impl fmt::Display for EventTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventTag::Clamp { component, value } => write!(f, "clamp {component} from {value:e}"),
            EventTag::Enter(name) => write!(f, "enter {name}"),
            EventTag::Leave(name) => write!(f, "leave {name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryEvent {
    pub time: f64,
    pub tag: EventTag,
}

/// Accepted steps of an integration, with dense output between them.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<OdeState>,
    pub events: Vec<TrajectoryEvent>,
    steps: Vec<DenseStep<3>>,
}

impl Trajectory {
    fn start(t0: f64, s: OdeState) -> Self {
        Self {
            times: vec![t0],
            states: vec![s],
            events: Vec::new(),
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, OdeState)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    pub fn t_end(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Dense-output state at `t`, or `None` outside the integrated span.
    pub fn at(&self, t: f64) -> Option<OdeState> {
        let (t0, t1) = (*self.times.first()?, *self.times.last()?);
        if t < t0 || t > t1 {
            return None;
        }
        if self.steps.is_empty() {
            return self.states.first().copied();
        }
        let idx = self.steps.partition_point(|s| s.t1 < t).min(self.steps.len() - 1);
        let y = self.steps[idx].eval(t);
        Some(OdeState::from_array(y))
    }

    /// CSV with header `t,u,v,w`; events follow as `#` comment lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,u,v,w\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = writeln!(out, "{t},{},{},{}", s.u, s.v, s.w);
        }
        for e in &self.events {
            let _ = writeln!(out, "# t={} {}", e.time, e.tag);
        }
        out
    }
}

fn validate_request(init: &OdeState, t_end: f64, opts: &OdeOptions) -> Result<(), OdeError> {
    if !init.is_finite() || init.u < 0.0 || init.v < 0.0 || init.w < 0.0 {
        return Err(OdeError::InvalidInput(format!(
            "initial state {init} must be finite and nonnegative"
        )));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(OdeError::InvalidInput(format!("t_end must be positive, got {t_end}")));
    }
    for (name, tol) in [("rtol", opts.rtol), ("atol", opts.atol)] {
        if !(1e-12..=1e-3).contains(&tol) {
            return Err(OdeError::InvalidInput(format!(
                "{name} = {tol:e} outside [1e-12, 1e-3]"
            )));
        }
    }
    if opts.proximity_eps <= 0.0 {
        return Err(OdeError::InvalidInput("proximity_eps must be positive".into()));
    }
    Ok(())
}

/// Adaptive Dormand-Prince integration of the reaction system from `init`
/// over `[0, t_end]`.
pub fn integrate(
    p: &ModelParams,
    init: OdeState,
    t_end: f64,
    opts: &OdeOptions,
) -> Result<Trajectory, OdeError> {
    p.validate().map_err(OdeError::Model)?;
    validate_request(&init, t_end, opts)?;

    let targets: Vec<Equilibrium> = compute_equilibria(p).into_iter().filter(|e| e.exists).collect();
    let mut inside: Vec<bool> = targets
        .iter()
        .map(|e| e.coords.distance(&init) <= opts.proximity_eps)
        .collect();

    let mut f = |_t: f64, y: &[f64; 3]| rhs_array(p, y);
    let stepper_opts = StepperOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        h_init: 1e-3,
        h_max: t_end / 100.0,
        h_min: 1e-14 * t_end.max(1.0),
        ..StepperOptions::default()
    };
    let mut stepper = Dopri5::new(&mut f, 0.0, init.to_array(), stepper_opts);
    let mut traj = Trajectory::start(0.0, init);
    for (e, &ins) in targets.iter().zip(&inside) {
        if ins {
            traj.events.push(TrajectoryEvent {
                time: 0.0,
                tag: EventTag::Enter(e.name),
            });
        }
    }

    while stepper.t() < t_end {
        let step = match stepper.step(&mut f, t_end, |y| {
            if y.iter().any(|&x| x < NEGATIVITY_FLOOR) {
                Admissible::Halve
            } else {
                Admissible::Yes
            }
        }) {
            Ok(step) => step,
            Err(source) => {
                return Err(OdeError::Stiff {
                    source,
                    partial: Box::new(traj),
                })
            }
        };
        let t = step.t1;
        let mut y = step.y1;
        let mut clamped = false;
        for (i, c) in ['u', 'v', 'w'].into_iter().enumerate() {
            if y[i] < 0.0 {
                traj.events.push(TrajectoryEvent {
                    time: t,
                    tag: EventTag::Clamp {
                        component: c,
                        value: y[i],
                    },
                });
                y[i] = 0.0;
                clamped = true;
            }
        }
        if clamped {
            stepper.reset_state(&mut f, y);
        }
        let s = OdeState::from_array(y);
        for (k, e) in targets.iter().enumerate() {
            let now = e.coords.distance(&s) <= opts.proximity_eps;
            if now != inside[k] {
                traj.events.push(TrajectoryEvent {
                    time: t,
                    tag: if now {
                        EventTag::Enter(e.name)
                    } else {
                        EventTag::Leave(e.name)
                    },
                });
                inside[k] = now;
            }
        }
        traj.times.push(t);
        traj.states.push(s);
        traj.steps.push(step);
    }
    Ok(traj)
}

/// Tail suprema compared against the absorbing-region bounds
/// `limsup u <= 1`, `limsup v <= 1 + a21/r2` and
/// `limsup (u + a13/a31 w) <= M/D` with `M = r1 + mu`, `D = mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    pub u_sup_tail: f64,
    pub v_sup_tail: f64,
    pub combined_tail: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub v_bound: f64,
    pub window_start: f64,
    pub u_ok: bool,
    pub v_ok: bool,
    pub combined_ok: bool,
}

impl BoundsReport {
    pub fn holds(&self) -> bool {
        self.u_ok && self.v_ok && self.combined_ok
    }
}

pub const BOUNDS_SLACK: f64 = 1e-3;
pub const TAIL_FRACTION: f64 = 0.2;
const MIN_SAMPLES: usize = 10;

pub fn check_bounds(traj: &Trajectory, p: &ModelParams) -> Result<BoundsReport, OdeError> {
    check_bounds_over(traj, p, TAIL_FRACTION)
}

/// Like [`check_bounds`] with an explicit window: the last `fraction` of the
/// time span (`1.0` checks the whole trajectory).
pub fn check_bounds_over(
    traj: &Trajectory,
    p: &ModelParams,
    fraction: f64,
) -> Result<BoundsReport, OdeError> {
    if traj.len() < MIN_SAMPLES {
        return Err(OdeError::InsufficientData {
            got: traj.len(),
            need: MIN_SAMPLES,
        });
    }
    let t0 = traj.times[0];
    let window_start = traj.t_end() - fraction.clamp(0.0, 1.0) * (traj.t_end() - t0);
    let ratio = p.a13 / p.a31;
    let (mut us, mut vs, mut cs) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        if *t < window_start {
            continue;
        }
        us = us.max(s.u);
        vs = vs.max(s.v);
        cs = cs.max(s.u + ratio * s.w);
    }
    let m = p.r1 + p.mu;
    let d = p.mu;
    let v_bound = p.v_ceiling();
    Ok(BoundsReport {
        u_sup_tail: us,
        v_sup_tail: vs,
        combined_tail: cs,
        m,
        d,
        v_bound,
        window_start,
        u_ok: us <= 1.0 + BOUNDS_SLACK,
        v_ok: vs <= v_bound + BOUNDS_SLACK,
        combined_ok: cs <= m / d + BOUNDS_SLACK,
    })
}

/// Earliest sample time after which the trajectory stays within `eps`
/// (sup-norm) of one of `targets` through the final sample.
pub fn detect_convergence(
    traj: &Trajectory,
    targets: &[Equilibrium],
    eps: f64,
) -> Option<(EquilibriumName, f64)> {
    if eps <= 0.0 || traj.is_empty() {
        return None;
    }
    let (_, last) = traj.last()?;
    let target = targets
        .iter()
        .filter(|e| e.coords.distance(&last) <= eps)
        .min_by(|a, b| a.coords.distance(&last).total_cmp(&b.coords.distance(&last)))?;
    let mut first = traj.len() - 1;
    while first > 0 && target.coords.distance(&traj.states[first - 1]) <= eps {
        first -= 1;
    }
    Some((target.name, traj.times[first]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub kind: LyapunovKind,
    /// Largest `V[i+1] - V[i]`, zero if V never increases.
    pub max_increase: f64,
    /// Largest `(V[i+1] - V[i]) / (1 + |V[i]|)`.
    pub max_relative_increase: f64,
    pub worst_index: Option<usize>,
    pub initial: f64,
    pub final_value: f64,
    pub pass: bool,
}

pub const MONOTONICITY_TOL: f64 = 1e-7;

/// Checks that the chosen Lyapunov function never increases between
/// consecutive samples by more than `1e-7 (1 + |V|)`.
pub fn monitor_lyapunov(
    traj: &Trajectory,
    kind: LyapunovKind,
    p: &ModelParams,
) -> Result<MonotonicityReport, OdeError> {
    let mut values = Vec::with_capacity(traj.len());
    for (i, s) in traj.states.iter().enumerate() {
        match lyapunov::evaluate(p, kind, s) {
            Ok(v) => values.push(v),
            Err(ModelError::Domain { reason, .. }) => {
                return Err(OdeError::LyapunovDomain {
                    index: i,
                    time: traj.times[i],
                    reason,
                })
            }
            Err(e) => return Err(OdeError::Model(e)),
        }
    }
    Ok(monotonicity(kind, &values))
}

pub(crate) fn monotonicity(kind: LyapunovKind, values: &[f64]) -> MonotonicityReport {
    let mut max_increase: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    let mut worst = None;
    let mut pass = true;
    for (i, w) in values.windows(2).enumerate() {
        let inc = w[1] - w[0];
        let rel = inc / (1.0 + w[0].abs());
        if inc > MONOTONICITY_TOL * (1.0 + w[0].abs()) {
            pass = false;
        }
        if rel > max_rel {
            max_rel = rel;
            max_increase = inc;
            worst = Some(i + 1);
        }
    }
    MonotonicityReport {
        kind,
        max_increase,
        max_relative_increase: max_rel,
        worst_index: worst,
        initial: values.first().copied().unwrap_or(f64::NAN),
        final_value: values.last().copied().unwrap_or(f64::NAN),
        pass,
    }
}
