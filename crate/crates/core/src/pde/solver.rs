//! Time stepping.
//!
//! The semi-discrete system couples the local reaction field in every cell
//! with the second difference of `w`; ghost cells mirror the boundary cells,
//! so the discrete Laplacian has zero column sums and conserves `sum(w)`.

use serde::{Deserialize, Serialize};

use super::Field1D;
use crate::error::PdeError;
use crate::model::{rhs_array, ModelParams};

/// Explicit diffusion bound `dt <= CFL * dx^2 / d`.
pub const CFL: f64 = 0.4;
/// Negative values above this floor are rounding and are zeroed silently;
/// deeper undershoots are clamped and counted.
pub const CLAMP_FLOOR: f64 = -1e-12;
/// Step used when diffusion does not limit it.
pub const DEFAULT_MAX_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Classical RK4 on the full semi-discrete system.
    #[default]
    ExplicitRk4,
    /// Strang splitting: RK4 half steps of the reaction around a
    /// Crank-Nicolson diffusion step. No step-size bound from diffusion.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub t_end: f64,
    /// Time between stored snapshots.
    pub output_every: f64,
    /// Requested step; `None` picks the largest admissible step capped at
    /// [`DEFAULT_MAX_DT`].
    pub dt: Option<f64>,
    pub scheme: Scheme,
    /// Switch off all reaction terms (pure diffusion of `w`).
    pub reactions: bool,
}

impl RunOptions {
    pub fn new(t_end: f64, output_every: f64) -> Self {
        Self {
            t_end,
            output_every,
            dt: None,
            scheme: Scheme::ExplicitRk4,
            reactions: true,
        }
    }
}

pub fn explicit_dt_limit(p: &ModelParams, dx: f64) -> f64 {
    CFL * dx * dx / p.d
}

/// Advances fields by fixed steps, counting clamp events.
pub struct Stepper<'a> {
    p: &'a ModelParams,
    dt: f64,
    scheme: Scheme,
    reactions: bool,
    inv_dx2: f64,
    y: Vec<f64>,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    tri: Vec<f64>,
    rhs: Vec<f64>,
    pub clamp_events: usize,
    pub cell_steps: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(p: &'a ModelParams, n_cells: usize, dx: f64, dt: f64, scheme: Scheme, reactions: bool) -> Result<Self, PdeError> {
        p.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(PdeError::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        let limit = explicit_dt_limit(p, dx);
        if scheme == Scheme::ExplicitRk4 && dt > limit * (1.0 + 1e-12) {
            return Err(PdeError::StepSize { dt, limit });
        }
        let m = 3 * n_cells;
        Ok(Self {
            p,
            dt,
            scheme,
            reactions,
            inv_dx2: 1.0 / (dx * dx),
            y: vec![0.0; m],
            k: std::array::from_fn(|_| vec![0.0; m]),
            tmp: vec![0.0; m],
            tri: vec![0.0; n_cells],
            rhs: vec![0.0; n_cells],
            clamp_events: 0,
            cell_steps: 0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn advance(&mut self, f: &mut Field1D) -> Result<(), PdeError> {
        let n = f.grid.n_cells;
        if self.y.len() != 3 * n {
            return Err(PdeError::Shape { got: n, expected: self.y.len() / 3 });
        }
        self.y[..n].copy_from_slice(&f.u);
        self.y[n..2 * n].copy_from_slice(&f.v);
        self.y[2 * n..].copy_from_slice(&f.w);
        match self.scheme {
            Scheme::ExplicitRk4 => self.rk4(n, self.dt, true),
            Scheme::Split => {
                let h = 0.5 * self.dt;
                if self.reactions {
                    self.rk4(n, h, false);
                }
                self.crank_nicolson(n);
                if self.reactions {
                    self.rk4(n, h, false);
                }
            }
        }
        if self.y.iter().any(|x| !x.is_finite()) {
            return Err(PdeError::NonFinite(f.time + self.dt));
        }
        for x in self.y.iter_mut() {
            if *x < 0.0 {
                if *x < CLAMP_FLOOR {
                    self.clamp_events += 1;
                }
                *x = 0.0;
            }
        }
        f.u.copy_from_slice(&self.y[..n]);
        f.v.copy_from_slice(&self.y[n..2 * n]);
        f.w.copy_from_slice(&self.y[2 * n..]);
        f.time += self.dt;
        self.cell_steps += n;
        Ok(())
    }

    fn eval(&self, n: usize, y: &[f64], out: &mut [f64], diffusion: bool) {
        if self.reactions {
            for i in 0..n {
                let r = rhs_array(self.p, &[y[i], y[n + i], y[2 * n + i]]);
                out[i] = r[0];
                out[n + i] = r[1];
                out[2 * n + i] = r[2];
            }
        } else {
            out.fill(0.0);
        }
        if diffusion {
            let w = &y[2 * n..];
            let dw = &mut out[2 * n..];
            let c = self.p.d * self.inv_dx2;
            for i in 0..n {
                let left = if i == 0 { w[0] } else { w[i - 1] };
                let right = if i + 1 == n { w[n - 1] } else { w[i + 1] };
                dw[i] += c * (left - 2.0 * w[i] + right);
            }
        }
    }

    fn rk4(&mut self, n: usize, h: f64, diffusion: bool) {
        let mut k = std::mem::take(&mut self.k);
        let mut tmp = std::mem::take(&mut self.tmp);
        let y = &self.y;
        self.eval(n, y, &mut k[0], diffusion);
        for (t, (a, b)) in tmp.iter_mut().zip(y.iter().zip(&k[0])) {
            *t = a + 0.5 * h * b;
        }
        self.eval(n, &tmp, &mut k[1], diffusion);
        for (t, (a, b)) in tmp.iter_mut().zip(y.iter().zip(&k[1])) {
            *t = a + 0.5 * h * b;
        }
        self.eval(n, &tmp, &mut k[2], diffusion);
        for (t, (a, b)) in tmp.iter_mut().zip(y.iter().zip(&k[2])) {
            *t = a + h * b;
        }
        self.eval(n, &tmp, &mut k[3], diffusion);
        for (j, yj) in self.y.iter_mut().enumerate() {
            *yj += h / 6.0 * (k[0][j] + 2.0 * k[1][j] + 2.0 * k[2][j] + k[3][j]);
        }
        self.k = k;
        self.tmp = tmp;
    }

    /// `(I - dt/2 d D2) w' = (I + dt/2 d D2) w`, solved with the Thomas
    /// algorithm.
    fn crank_nicolson(&mut self, n: usize) {
        let r = 0.5 * self.dt * self.p.d * self.inv_dx2;
        let w = &mut self.y[2 * n..];
        for i in 0..n {
            let left = if i == 0 { w[0] } else { w[i - 1] };
            let right = if i + 1 == n { w[n - 1] } else { w[i + 1] };
            self.rhs[i] = w[i] + r * (left - 2.0 * w[i] + right);
        }
        // diagonal 1 + 2r (1 + r at the ends), off-diagonals -r
        let diag = |i: usize| if i == 0 || i + 1 == n { 1.0 + r } else { 1.0 + 2.0 * r };
        let c = &mut self.tri;
        c[0] = -r / diag(0);
        self.rhs[0] /= diag(0);
        for i in 1..n {
            let m = diag(i) + r * c[i - 1];
            c[i] = -r / m;
            self.rhs[i] = (self.rhs[i] + r * self.rhs[i - 1]) / m;
        }
        w[n - 1] = self.rhs[n - 1];
        for i in (0..n - 1).rev() {
            w[i] = self.rhs[i] - c[i] * w[i + 1];
        }
    }
}

/// One step of size `dt`.
pub fn step(p: &ModelParams, f: &Field1D, dt: f64, scheme: Scheme) -> Result<Field1D, PdeError> {
    let mut out = f.clone();
    Stepper::new(p, f.grid.n_cells, f.grid.dx(), dt, scheme, true)?.advance(&mut out)?;
    Ok(out)
}

/// Snapshots of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceTimeRecord {
    pub params: ModelParams,
    pub options: RunOptions,
    /// Step actually used (`t_end` divided into equal steps).
    pub dt: f64,
    pub snapshots: Vec<Field1D>,
    pub clamp_events: usize,
    pub cell_steps: usize,
}

impl SpaceTimeRecord {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|f| f.time).collect()
    }

    pub fn terminal(&self) -> &Field1D {
        self.snapshots.last().expect("a record holds the initial snapshot")
    }

    pub fn clamp_fraction(&self) -> f64 {
        if self.cell_steps == 0 {
            0.0
        } else {
            self.clamp_events as f64 / self.cell_steps as f64
        }
    }
}

pub fn run(p: &ModelParams, f0: &Field1D, opts: &RunOptions) -> Result<SpaceTimeRecord, PdeError> {
    if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
        return Err(PdeError::InvalidInput(format!("t_end must be positive, got {}", opts.t_end)));
    }
    if !(opts.output_every > 0.0) {
        return Err(PdeError::InvalidInput("output_every must be positive".into()));
    }
    p.validate()?;
    let dx = f0.grid.dx();
    let requested = match opts.dt {
        Some(dt) => dt,
        None => match opts.scheme {
            Scheme::ExplicitRk4 => explicit_dt_limit(p, dx).min(DEFAULT_MAX_DT),
            Scheme::Split => DEFAULT_MAX_DT,
        },
    };
    if !(requested > 0.0) {
        return Err(PdeError::InvalidInput(format!("dt must be positive, got {requested}")));
    }
    let n_steps = (opts.t_end / requested).ceil().max(1.0) as usize;
    let dt = opts.t_end / n_steps as f64;
    let mut stepper = Stepper::new(p, f0.grid.n_cells, dx, dt, opts.scheme, opts.reactions)?;
    let mut f = f0.clone();
    f.time = 0.0;
    let mut snapshots = vec![f.clone()];
    // snapshot at the step nearest each multiple of output_every
    let mut next_out = 1usize;
    for k in 1..=n_steps {
        stepper.advance(&mut f)?;
        f.time = opts.t_end * k as f64 / n_steps as f64;
        let due = next_out as f64 * opts.output_every;
        if f.time >= due - 0.5 * dt || k == n_steps {
            snapshots.push(f.clone());
            while next_out as f64 * opts.output_every < f.time + 0.5 * dt {
                next_out += 1;
            }
        }
    }
    Ok(SpaceTimeRecord {
        params: *p,
        options: *opts,
        dt,
        snapshots,
        clamp_events: stepper.clamp_events,
        cell_steps: stepper.cell_steps,
    })
}
