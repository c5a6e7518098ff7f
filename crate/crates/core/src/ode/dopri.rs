//! Dormand-Prince 5(4) stepper with PI step-size control and the standard
//! fourth-order continuous extension.
//!
//! The stepper only advances one accepted step at a time; drivers decide what
//! to do between steps (event location, clamping, stopping criteria).

use crate::error::IntegrateError;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// error weights: fifth-order minus embedded fourth-order
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for StepperOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: 1e-3,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 5_000_000,
        }
    }
}

/// One accepted step together with its interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    /// Interpolated state at `t` in `[t0, t1]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        if h == 0.0 {
            return self.y0;
        }
        let theta = (t - self.t0) / h;
        let theta1 = 1.0 - theta;
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.y0[i]
                + theta
                    * (self.rcont[0][i]
                        + theta1
                            * (self.rcont[1][i]
                                + theta * (self.rcont[2][i] + theta1 * self.rcont[3][i])));
        }
        out
    }
}

/// Outcome of the caller's admissibility check on a proposed step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissible {
    Yes,
    /// Reject the step and retry with half the step size.
    Halve,
}

pub struct Dopri5<const N: usize> {
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    err_old: f64,
    opts: StepperOptions,
    steps: usize,
    rejected: usize,
    evals: usize,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

impl<const N: usize> Dopri5<N> {
    pub fn new<F>(f: &mut F, t0: f64, y0: [f64; N], opts: StepperOptions) -> Self
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let k1 = f(t0, &y0);
        Self {
            t: t0,
            y: y0,
            k1,
            h: opts.h_init.min(opts.h_max),
            err_old: 1e-4,
            opts,
            steps: 0,
            rejected: 0,
            evals: 1,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn accepted(&self) -> usize {
        self.steps
    }

    pub fn evaluations(&self) -> usize {
        self.evals
    }

    /// Overwrite the current state (e.g. after clamping a tiny undershoot).
    pub fn reset_state<F>(&mut self, f: &mut F, y: [f64; N])
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        self.y = y;
        self.k1 = f(self.t, &y);
        self.evals += 1;
    }

    fn error_norm(&self, y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = self.opts.atol + self.opts.rtol * self.y[i].abs().max(y_new[i].abs());
            acc += (err[i] / sc).powi(2);
        }
        (acc / N as f64).sqrt()
    }

    /// Advance by one accepted step without passing `t_limit`.
    pub fn step<F, A>(
        &mut self,
        f: &mut F,
        t_limit: f64,
        mut admissible: A,
    ) -> Result<DenseStep<N>, IntegrateError>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        A: FnMut(&[f64; N]) -> Admissible,
    {
        if self.steps >= self.opts.max_steps {
            return Err(IntegrateError::TooManySteps(self.opts.max_steps));
        }
        let expo = 0.2 - BETA * 0.75;
        loop {
            let remaining = t_limit - self.t;
            let mut h = self.h.min(self.opts.h_max);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h < self.opts.h_min && !last {
                return Err(IntegrateError::StepSizeUnderflow { t: self.t, h });
            }
            let (t, y, k1) = (self.t, self.y, self.k1);

            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                t + C4 * h,
                &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(
                    &y,
                    h,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = axpy(
                &y,
                h,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let t_new = if last { t_limit } else { t + h };
            let k7 = f(t_new, &y_new);
            self.evals += 6;

            let mut err = [0.0; N];
            for (i, e) in err.iter_mut().enumerate() {
                *e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
            }
            let err_norm = self.error_norm(&y_new, &err);
            if !err_norm.is_finite() || y_new.iter().any(|x| !x.is_finite()) {
                self.rejected += 1;
                self.h = h * FAC_MIN;
                if self.h < self.opts.h_min {
                    return Err(IntegrateError::NonFinite(t));
                }
                continue;
            }

            let fac11 = err_norm.powf(expo);
            if err_norm > 1.0 {
                self.rejected += 1;
                self.h = h / (1.0 / FAC_MIN).min(fac11 / SAFETY);
                continue;
            }
            if admissible(&y_new) == Admissible::Halve {
                self.rejected += 1;
                self.h = 0.5 * h;
                if self.h < self.opts.h_min {
                    return Err(IntegrateError::StepSizeUnderflow { t, h: self.h });
                }
                continue;
            }

            // PI controller
            let fac = (fac11 / self.err_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let h_next = h / fac;
            self.err_old = err_norm.max(1e-4);

            let mut rcont = [[0.0; N]; 4];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = ydiff;
                rcont[1][i] = bspl;
                rcont[2][i] = ydiff - h * k7[i] - bspl;
                rcont[3][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }

            self.t = t_new;
            self.y = y_new;
            self.k1 = k7;
            // keep the controller's proposal when the step was truncated by t_limit
            self.h = if last { self.h.max(h_next) } else { h_next };
            self.steps += 1;
            return Ok(DenseStep {
                t0: t,
                t1: t_new,
                y0: y,
                y1: y_new,
                rcont,
            });
        }
    }
}

/// Integrates to `t_end` and returns the final state. Convenience for tests
/// and cross-checks.
pub fn solve_to<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: StepperOptions,
) -> Result<[f64; N], IntegrateError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut st = Dopri5::new(&mut f, t0, y0, opts);
    while st.t() < t_end {
        st.step(&mut f, t_end, |_| Admissible::Yes)?;
    }
    Ok(*st.y())
}
