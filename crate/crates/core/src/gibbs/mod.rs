//! Quadrature Gibbs measures and distances between grid densities.
//!
//! For weight spaces of dimension one or two the Gibbs measure
//! `mu_s ~ exp(-2 L / s)` is computed on a midpoint grid, and chain samples
//! are binned on the same grid so TV, W2 and 2-Rényi estimates compare like
//! with like.

mod distance;
mod empirical;
mod grid;
mod quadrature;

pub use distance::{renyi2, tv_distance, w2_distance_1d};
pub use empirical::{averaged_measure, SnapshotKind};
pub use grid::{Axis, Density, EmpiricalDensity, Grid, GridDensity, Histogram};
pub use quadrature::{gibbs_on_grid, quadrature_gibbs, GridSpec, TAIL_TOLERANCE};

#[cfg(test)]
mod tests;
