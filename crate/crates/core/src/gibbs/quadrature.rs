use serde::{Deserialize, Serialize};

use super::grid::{Axis, Grid, GridDensity};
use crate::nn::{ProblemSpec, WeightMatrix};
use crate::{Error, Result};

/// Boundary cells must carry less than this much mass.
pub const TAIL_TOLERANCE: f64 = 1e-8;

const MAX_EXPANSIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Cells per axis.
    pub bins: usize,
    /// Initial half-width of the (origin-centred) domain. Defaults to twelve
    /// standard deviations of the regularizer's own Gibbs measure.
    pub half_width: Option<f64>,
}

impl GridSpec {
    pub fn with_bins(bins: usize) -> Self {
        Self { bins, half_width: None }
    }
}

/// Exact Gibbs measure `exp(-2 L(W) / s) / Z` on a midpoint grid.
///
/// The domain grows by a factor 3/2 until the boundary cells hold less than
/// [`TAIL_TOLERANCE`] of the mass. Only weight spaces with `p * d <= 2` are
/// supported.
pub fn quadrature_gibbs(spec: &ProblemSpec, s: f64, grid_spec: &GridSpec) -> Result<GridDensity> {
    let dim = spec.param_count();
    if dim > 2 {
        return Err(Error::UnsupportedDimension(dim));
    }
    if !(s > 0.0) || grid_spec.bins < 3 {
        return Err(Error::InvalidParameter("need s > 0 and at least 3 bins".into()));
    }
    let mut half = grid_spec.half_width.unwrap_or_else(|| (12.0 * (s / (2.0 * spec.lambda())).sqrt()).max(1.0));
    let (p, d) = (spec.width(), spec.input_dim());
    for _ in 0..MAX_EXPANSIONS {
        let axes = vec![Axis::new(-half, half, grid_spec.bins)?; dim];
        let density = gibbs_on(spec, s, Grid::new(axes)?, p, d)?;
        if density.boundary_mass() < TAIL_TOLERANCE {
            return Ok(density);
        }
        half *= 1.5;
    }
    Err(Error::Precondition("Gibbs measure does not fit a finite grid".into()))
}

/// Gibbs measure on a caller-chosen grid, without tail checks.
pub fn gibbs_on_grid(spec: &ProblemSpec, s: f64, grid: Grid) -> Result<GridDensity> {
    if grid.dim() != spec.param_count() {
        return Err(Error::DimensionMismatch { expected: spec.param_count(), got: grid.dim() });
    }
    gibbs_on(spec, s, grid, spec.width(), spec.input_dim())
}

fn gibbs_on(spec: &ProblemSpec, s: f64, grid: Grid, p: usize, d: usize) -> Result<GridDensity> {
    let log_weights = (0..grid.cells())
        .map(|i| {
            let w = WeightMatrix::from_vec(p, d, grid.center(i))?;
            Ok(-2.0 * spec.empirical_loss(&w)? / s)
        })
        .collect::<Result<Vec<f64>>>()?;
    let top = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    GridDensity::from_weights(grid, log_weights.into_iter().map(|l| (l - top).exp()).collect())
}
