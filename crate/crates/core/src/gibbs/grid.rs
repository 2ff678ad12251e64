use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform partition of `[lo, hi]` into `bins` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || bins == 0 {
            return Err(Error::InvalidParameter(format!("bad axis [{lo}, {hi}] with {bins} bins")));
        }
        Ok(Self { lo, hi, bins })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.width()
    }

    /// Cell containing `x`, with points outside clamped to the edge cells.
    pub fn locate_clamped(&self, x: f64) -> (usize, bool) {
        let t = ((x - self.lo) / self.width()).floor();
        if t < 0.0 || x.is_nan() {
            (0, x < self.lo || x.is_nan())
        } else if t >= self.bins as f64 {
            (self.bins - 1, x > self.hi)
        } else {
            (t as usize, false)
        }
    }
}

/// Tensor grid over a one- or two-dimensional weight space. Cells are stored
/// with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::UnsupportedDimension(axes.len()));
        }
        Ok(Self { axes })
    }

    pub fn uniform_1d(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        Self::new(vec![Axis::new(lo, hi, bins)?])
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn cells(&self) -> usize {
        self.axes.iter().map(|a| a.bins).product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::width).product()
    }

    /// Center of cell `idx`, one coordinate per axis.
    pub fn center(&self, idx: usize) -> Vec<f64> {
        match self.axes.as_slice() {
            [a] => vec![a.center(idx)],
            [a, b] => vec![a.center(idx / b.bins), b.center(idx % b.bins)],
            _ => unreachable!("grids are 1D or 2D"),
        }
    }

    /// Index of the cell containing `point`, clamping outliers to the border.
    /// The flag reports whether clamping happened.
    pub fn locate(&self, point: &[f64]) -> (usize, bool) {
        match self.axes.as_slice() {
            [a] => a.locate_clamped(point[0]),
            [a, b] => {
                let (i, ci) = a.locate_clamped(point[0]);
                let (j, cj) = b.locate_clamped(point[1]);
                (i * b.bins + j, ci || cj)
            }
            _ => unreachable!("grids are 1D or 2D"),
        }
    }

    /// Whether `idx` touches the grid boundary.
    pub fn is_boundary(&self, idx: usize) -> bool {
        match self.axes.as_slice() {
            [a] => idx == 0 || idx + 1 == a.bins,
            [a, b] => {
                let (i, j) = (idx / b.bins, idx % b.bins);
                i == 0 || j == 0 || i + 1 == a.bins || j + 1 == b.bins
            }
            _ => unreachable!("grids are 1D or 2D"),
        }
    }
}

/// Common view of grid-based probability vectors.
pub trait Density {
    fn grid(&self) -> &Grid;
    fn masses(&self) -> &[f64];

    /// CSV with columns `cell_center_0[,cell_center_1],mass`.
    fn write_csv<W: Write>(&self, mut out: W) -> Result<()>
    where
        Self: Sized,
    {
        let grid = self.grid();
        let header: Vec<String> = (0..grid.dim()).map(|j| format!("cell_center_{j}")).chain(["mass".into()]).collect();
        writeln!(out, "{}", header.join(","))?;
        for (idx, m) in self.masses().iter().enumerate() {
            for c in grid.center(idx) {
                write!(out, "{c},")?;
            }
            writeln!(out, "{m}")?;
        }
        Ok(())
    }

    fn mean_1d(&self) -> f64 {
        let g = self.grid();
        self.masses().iter().enumerate().map(|(i, m)| m * g.center(i)[0]).sum()
    }
}

/// Normalized cell masses of an exact (quadrature) density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridDensity {
    grid: Grid,
    masses: Vec<f64>,
}

impl GridDensity {
    /// Normalizes non-negative weights.
    pub fn from_weights(grid: Grid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != grid.cells() {
            return Err(Error::DimensionMismatch { expected: grid.cells(), got: weights.len() });
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter("density weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("density has zero total mass".into()));
        }
        Ok(Self { masses: weights.into_iter().map(|w| w / total).collect(), grid })
    }

    /// Cell-center density times cell volume, normalized.
    pub fn from_fn(grid: Grid, mut density: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let vol = grid.cell_volume();
        let weights = (0..grid.cells()).map(|i| density(&grid.center(i)) * vol).collect();
        Self::from_weights(grid, weights)
    }

    pub fn boundary_mass(&self) -> f64 {
        self.masses.iter().enumerate().filter(|(i, _)| self.grid.is_boundary(*i)).map(|(_, m)| m).sum()
    }
}

impl Density for GridDensity {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn masses(&self) -> &[f64] {
        &self.masses
    }
}

/// Histogram of samples on a fixed grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalDensity {
    grid: Grid,
    masses: Vec<f64>,
    samples: u64,
    clamped: u64,
}

impl EmpiricalDensity {
    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// Samples that fell outside the grid and were assigned to border cells.
    pub fn clamped(&self) -> u64 {
        self.clamped
    }
}

impl Density for EmpiricalDensity {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn masses(&self) -> &[f64] {
        &self.masses
    }
}

/// Streaming histogram builder. Accumulators on the same grid merge by
/// adding counts, so per-thread partial histograms combine exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    grid: Grid,
    counts: Vec<u64>,
    total: u64,
    clamped: u64,
}

impl Histogram {
    pub fn new(grid: Grid) -> Self {
        Self { counts: vec![0; grid.cells()], grid, total: 0, clamped: 0 }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn add(&mut self, point: &[f64]) {
        let (idx, clamped) = self.grid.locate(point);
        self.counts[idx] += 1;
        self.total += 1;
        self.clamped += clamped as u64;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        self.clamped += other.clamped;
        Ok(())
    }

    pub fn to_density(&self) -> Result<EmpiricalDensity> {
        if self.total == 0 {
            return Err(Error::NoSnapshots);
        }
        let n = self.total as f64;
        Ok(EmpiricalDensity {
            grid: self.grid.clone(),
            masses: self.counts.iter().map(|c| *c as f64 / n).collect(),
            samples: self.total,
            clamped: self.clamped,
        })
    }
}
