//! Method-of-lines simulation of the reaction-diffusion system on `[0, L]`
//! with zero-flux boundaries. Only `w` diffuses.

pub mod front;
pub mod render;
pub mod solver;

use serde::{Deserialize, Serialize};

use crate::error::PdeError;
use crate::model::OdeState;

pub use front::{front_speed, FrontDirection, FrontTrace};
pub use solver::{run, step, RunOptions, Scheme, SpaceTimeRecord};

/// Smallest admissible number of cells.
pub const MIN_CELLS: usize = 16;
pub const DEFAULT_LENGTH: f64 = 10.0;

/// Uniform cell-centered grid on `[0, length]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub length: f64,
    pub n_cells: usize,
}

impl Grid1D {
    pub fn new(length: f64, n_cells: usize) -> Result<Self, PdeError> {
        if n_cells < MIN_CELLS {
            return Err(PdeError::GridTooCoarse(n_cells));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(PdeError::InvalidGrid(format!("length must be positive, got {length}")));
        }
        Ok(Self { length, n_cells })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    /// Index of the cell containing `x`.
    pub fn cell_of(&self, x: f64) -> usize {
        ((x / self.dx()).floor().max(0.0) as usize).min(self.n_cells - 1)
    }
}

/// Cell averages of the three densities at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field1D {
    pub grid: Grid1D,
    pub time: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl Field1D {
    pub fn new(grid: Grid1D, u: Vec<f64>, v: Vec<f64>, w: Vec<f64>) -> Result<Self, PdeError> {
        for a in [&u, &v, &w] {
            if a.len() != grid.n_cells {
                return Err(PdeError::Shape { got: a.len(), expected: grid.n_cells });
            }
            if a.iter().any(|x| !x.is_finite()) {
                return Err(PdeError::NonFinite(0.0));
            }
        }
        Ok(Self { grid, time: 0.0, u, v, w })
    }

    pub fn uniform(grid: Grid1D, s: OdeState) -> Self {
        let n = grid.n_cells;
        Self {
            grid,
            time: 0.0,
            u: vec![s.u; n],
            v: vec![s.v; n],
            w: vec![s.w; n],
        }
    }

    pub fn cell(&self, i: usize) -> OdeState {
        OdeState::new(self.u[i], self.v[i], self.w[i])
    }

    /// `sum(w) dx`.
    pub fn w_mass(&self) -> f64 {
        self.w.iter().sum::<f64>() * self.grid.dx()
    }

    /// Largest sup-norm distance of the cells in `range` to `s`.
    pub fn distance_to(&self, s: OdeState, range: std::ops::Range<usize>) -> f64 {
        range.map(|i| self.cell(i).distance(&s)).fold(0.0, f64::max)
    }

    /// Sup-norm distance between two fields on the same grid.
    pub fn distance(&self, other: &Field1D) -> Result<f64, PdeError> {
        if self.grid.n_cells != other.grid.n_cells {
            return Err(PdeError::Shape { got: other.grid.n_cells, expected: self.grid.n_cells });
        }
        Ok((0..self.grid.n_cells)
            .map(|i| self.cell(i).distance(&other.cell(i)))
            .fold(0.0, f64::max))
    }

    /// Cell averages of a field on a grid with `k` times fewer cells.
    pub fn coarsen(&self, k: usize) -> Result<Field1D, PdeError> {
        if k == 0 || !self.grid.n_cells.is_multiple_of(k) {
            return Err(PdeError::InvalidGrid(format!(
                "{} cells cannot be coarsened by {k}",
                self.grid.n_cells
            )));
        }
        let grid = Grid1D::new(self.grid.length, self.grid.n_cells / k)?;
        let avg = |a: &[f64]| a.chunks(k).map(|c| c.iter().sum::<f64>() / k as f64).collect();
        Ok(Field1D { grid, time: self.time, u: avg(&self.u), v: avg(&self.v), w: avg(&self.w) })
    }
}

/// `value` on `[from, to]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub from: f64,
    pub to: f64,
    pub value: f64,
}

/// Piecewise-constant initial profile: `background` outside all pieces,
/// later pieces override earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesProfile {
    #[serde(default)]
    pub background: f64,
    #[serde(default)]
    pub pieces: Vec<Piece>,
}

impl SpeciesProfile {
    pub fn constant(value: f64) -> Self {
        Self { background: value, pieces: Vec::new() }
    }

    pub fn on(from: f64, to: f64, value: f64) -> Self {
        Self { background: 0.0, pieces: vec![Piece { from, to, value }] }
    }

    pub fn value_at(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .rev()
            .find(|p| p.from <= x && x <= p.to)
            .map_or(self.background, |p| p.value)
    }

    fn validate(&self, species: &str) -> Result<(), PdeError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.background) || self.pieces.iter().any(|p| !ok(p.value) || !(p.from <= p.to)) {
            return Err(PdeError::InvalidInput(format!(
                "initial profile of {species} needs finite nonnegative values on ordered intervals"
            )));
        }
        Ok(())
    }
}

/// Initial data given by one profile per species.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialProfiles {
    pub u: SpeciesProfile,
    pub v: SpeciesProfile,
    pub w: SpeciesProfile,
}

impl InitialProfiles {
    /// Samples the profiles at cell midpoints.
    pub fn discretize(&self, grid: Grid1D) -> Result<Field1D, PdeError> {
        self.u.validate("u")?;
        self.v.validate("v")?;
        self.w.validate("w")?;
        let xs = grid.centers();
        let sample = |p: &SpeciesProfile| xs.iter().map(|&x| p.value_at(x)).collect();
        Field1D::new(grid, sample(&self.u), sample(&self.v), sample(&self.w))
    }
}

/// Profiles of the three invasion scenarios on `[0, 10]`, scaled to the
/// grid length.
pub fn scenario_profiles(id: u32, length: f64) -> Result<InitialProfiles, PdeError> {
    let s = length / 10.0;
    Ok(match id {
        1 => InitialProfiles {
            u: SpeciesProfile::constant(0.2),
            v: SpeciesProfile::constant(0.1),
            w: SpeciesProfile::on(4.8 * s, 5.2 * s, 0.08),
        },
        2 => InitialProfiles {
            u: SpeciesProfile::constant(1.0),
            v: SpeciesProfile::on(0.0, 5.0 * s, 0.1),
            w: SpeciesProfile::on(5.0 * s, 10.0 * s, 0.1),
        },
        3 => InitialProfiles {
            u: SpeciesProfile::on(0.0, 5.0 * s, 0.15),
            v: SpeciesProfile::constant(1.0),
            w: SpeciesProfile::on(0.0, 5.0 * s, 0.1),
        },
        other => return Err(PdeError::UnknownScenario(other)),
    })
}

pub fn make_scenario(id: u32, grid: Grid1D) -> Result<Field1D, PdeError> {
    scenario_profiles(id, grid.length)?.discretize(grid)
}

/// Invasion of the prey-only state: `u = 1` everywhere, both predators
/// seeded at `0.1` on the leftmost `fraction` of the domain.
pub fn invasion_profiles(length: f64, fraction: f64) -> InitialProfiles {
    InitialProfiles {
        u: SpeciesProfile::constant(1.0),
        v: SpeciesProfile::on(0.0, fraction * length, 0.1),
        w: SpeciesProfile::on(0.0, fraction * length, 0.1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::new(10.0, 200).unwrap()
    }

    fn at(f: &Field1D, x: f64) -> (f64, f64, f64) {
        let i = f.grid.cell_of(x);
        (f.u[i], f.v[i], f.w[i])
    }

    #[test]
    fn scenario_values() {
        let g = grid();
        assert_eq!(at(&make_scenario(1, g).unwrap(), 5.0), (0.2, 0.1, 0.08));
        assert_eq!(at(&make_scenario(1, g).unwrap(), 3.0), (0.2, 0.1, 0.0));
        assert_eq!(at(&make_scenario(2, g).unwrap(), 7.0), (1.0, 0.0, 0.1));
        assert_eq!(at(&make_scenario(2, g).unwrap(), 2.0), (1.0, 0.1, 0.0));
        assert_eq!(at(&make_scenario(3, g).unwrap(), 8.0), (0.0, 1.0, 0.0));
        assert_eq!(at(&make_scenario(3, g).unwrap(), 1.0), (0.15, 1.0, 0.1));
    }

    #[test]
    fn midpoint_membership() {
        // cells with midpoints in [4.8, 5.2]: 4.825, ..., 5.175
        let f = make_scenario(1, grid()).unwrap();
        assert_eq!(f.w.iter().filter(|w| **w > 0.0).count(), 8);
        assert_eq!(f.w[96], 0.08);
        assert_eq!(f.w[95], 0.0);
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(matches!(Grid1D::new(10.0, 8), Err(PdeError::GridTooCoarse(8))));
        assert!(Grid1D::new(0.0, 100).is_err());
        assert!(matches!(make_scenario(4, grid()), Err(PdeError::UnknownScenario(4))));
        let bad = InitialProfiles { u: SpeciesProfile::constant(-1.0), ..Default::default() };
        assert!(bad.discretize(grid()).is_err());
        assert!(matches!(
            Field1D::new(grid(), vec![0.0; 3], vec![0.0; 200], vec![0.0; 200]),
            Err(PdeError::Shape { got: 3, expected: 200 })
        ));
    }

    #[test]
    fn later_pieces_override() {
        let p = SpeciesProfile {
            background: 1.0,
            pieces: vec![Piece { from: 0.0, to: 5.0, value: 2.0 }, Piece { from: 4.0, to: 6.0, value: 3.0 }],
        };
        assert_eq!(p.value_at(1.0), 2.0);
        assert_eq!(p.value_at(4.5), 3.0);
        assert_eq!(p.value_at(8.0), 1.0);
    }

    #[test]
    fn coarsening_averages() {
        let g = Grid1D::new(1.0, 32).unwrap();
        let f = Field1D::new(g, (0..32).map(f64::from).collect(), vec![1.0; 32], vec![0.0; 32]).unwrap();
        let c = f.coarsen(2).unwrap();
        assert_eq!(c.grid.n_cells, 16);
        assert_eq!(c.u[0], 0.5);
        assert_eq!(c.u[15], 30.5);
        assert!(f.coarsen(3).is_err());
    }
}
