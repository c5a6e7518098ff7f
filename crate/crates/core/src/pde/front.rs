//! Invasion-front tracking by level crossings of `w`.

use serde::{Deserialize, Serialize};

use super::solver::SpaceTimeRecord;
use super::Field1D;
use crate::error::PdeError;

/// Minimum number of front positions in the fitted half of the trace.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrontDirection {
    /// Track the rightmost crossing (front moving right).
    #[default]
    Rightward,
    /// Track the leftmost crossing.
    Leftward,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontTrace {
    pub threshold: f64,
    pub direction: FrontDirection,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    /// Slope of the least-squares line through the last half of the trace,
    /// signed so that motion in `direction` is positive.
    pub speed: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Distance covered by the front over the whole trace, as a fraction of
    /// the domain length.
    pub traversed_fraction: f64,
}

/// Crossing of `w = threshold` on the side given by `direction`, linearly
/// interpolated between cell centers. `None` if no cell reaches the
/// threshold or the front already touches the far boundary cell.
pub fn front_position(f: &Field1D, threshold: f64, direction: FrontDirection) -> Option<f64> {
    let n = f.grid.n_cells;
    let x = |i: usize| f.grid.center(i);
    let cross = |i: usize, j: usize| {
        let (a, b) = (f.w[i], f.w[j]);
        x(i) + (x(j) - x(i)) * (a - threshold) / (a - b)
    };
    match direction {
        FrontDirection::Rightward => {
            let i = (0..n).rev().find(|&i| f.w[i] >= threshold)?;
            (i + 1 < n).then(|| cross(i, i + 1))
        }
        FrontDirection::Leftward => {
            let i = (0..n).find(|&i| f.w[i] >= threshold)?;
            (i > 0).then(|| cross(i, i - 1))
        }
    }
}

pub fn front_speed(
    record: &SpaceTimeRecord,
    threshold: f64,
    direction: FrontDirection,
) -> Result<FrontTrace, PdeError> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(PdeError::InvalidInput(format!("threshold must be positive, got {threshold}")));
    }
    let (mut times, mut positions) = (Vec::new(), Vec::new());
    for f in &record.snapshots {
        if let Some(x) = front_position(f, threshold, direction) {
            times.push(f.time);
            positions.push(x);
        }
    }
    if times.is_empty() {
        return Err(PdeError::InsufficientTrace(format!("w never crosses {threshold}")));
    }
    let t_mid = 0.5 * (times[0] + times[times.len() - 1]);
    let start = times.partition_point(|t| *t < t_mid);
    let (ts, xs) = (&times[start..], &positions[start..]);
    if ts.len() < MIN_FIT_POINTS {
        return Err(PdeError::InsufficientTrace(format!(
            "{} front positions in the fitted half, need {MIN_FIT_POINTS}",
            ts.len()
        )));
    }
    let (slope, intercept, r_squared) = linear_fit(ts, xs);
    let sign = match direction {
        FrontDirection::Rightward => 1.0,
        FrontDirection::Leftward => -1.0,
    };
    let length = record.snapshots[0].grid.length;
    let (lo, hi) = positions.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(*x), hi.max(*x))
    });
    Ok(FrontTrace {
        threshold,
        direction,
        times,
        positions,
        speed: sign * slope,
        intercept,
        r_squared,
        traversed_fraction: (hi - lo) / length,
    })
}

/// Ordinary least squares `x = a t + b`; returns `(a, b, R^2)`.
pub fn linear_fit(t: &[f64], x: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let xm = x.iter().sum::<f64>() / n;
    let (mut stt, mut stx, mut sxx) = (0.0, 0.0, 0.0);
    for (a, b) in t.iter().zip(x) {
        stt += (a - tm) * (a - tm);
        stx += (a - tm) * (b - xm);
        sxx += (b - xm) * (b - xm);
    }
    if stt == 0.0 {
        return (0.0, xm, 0.0);
    }
    let slope = stx / stt;
    let r2 = if sxx == 0.0 { 1.0 } else { stx * stx / (stt * sxx) };
    (slope, xm - slope * tm, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::pde::solver::RunOptions;
    use crate::pde::Grid1D;

    fn record_from(fields: Vec<Field1D>) -> SpaceTimeRecord {
        SpaceTimeRecord {
            params: ModelParams::reference(),
            options: RunOptions::new(1.0, 1.0),
            dt: 1.0,
            snapshots: fields,
            clamp_events: 0,
            cell_steps: 0,
        }
    }

    fn step_profile(grid: Grid1D, edge: f64, t: f64) -> Field1D {
        let w = grid.centers().iter().map(|x| if *x < edge { 1.0 } else { 0.0 }).collect();
        let n = grid.n_cells;
        let mut f = Field1D::new(grid, vec![0.0; n], vec![0.0; n], w).unwrap();
        f.time = t;
        f
    }

    #[test]
    fn exact_line_is_recovered() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let x = [1.0, 3.0, 5.0, 7.0];
        let (a, b, r2) = linear_fit(&t, &x);
        assert!((a - 2.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn moving_step_speed() {
        let g = Grid1D::new(100.0, 100).unwrap();
        let rec = record_from((0..40).map(|k| step_profile(g, 10.0 + 2.0 * k as f64, k as f64)).collect());
        let tr = front_speed(&rec, 0.5, FrontDirection::Rightward).unwrap();
        assert!((tr.speed - 2.0).abs() < 1e-12, "{}", tr.speed);
        assert!(tr.r_squared > 0.999);
        assert!((tr.traversed_fraction - 0.78).abs() < 1e-12);
        let left = front_speed(&rec, 0.5, FrontDirection::Leftward);
        assert!(left.is_err());
    }

    #[test]
    fn interpolated_crossing() {
        let g = Grid1D::new(16.0, 16).unwrap();
        let mut w = vec![0.0; 16];
        w[..5].fill(1.0);
        w[5] = 0.5;
        let f = Field1D::new(g, vec![0.0; 16], vec![0.0; 16], w).unwrap();
        // centers 4.5 (w=1), 5.5 (w=0.5), 6.5 (w=0)
        assert_eq!(front_position(&f, 0.25, FrontDirection::Rightward), Some(6.0));
        assert_eq!(front_position(&f, 0.75, FrontDirection::Rightward), Some(5.0));
        assert_eq!(front_position(&f, 2.0, FrontDirection::Rightward), None);
    }

    #[test]
    fn no_front_is_an_error() {
        let g = Grid1D::new(10.0, 16).unwrap();
        let rec = record_from(vec![step_profile(g, -1.0, 0.0), step_profile(g, -1.0, 1.0)]);
        assert!(matches!(
            front_speed(&rec, 0.05, FrontDirection::Rightward),
            Err(PdeError::InsufficientTrace(_))
        ));
    }
}
