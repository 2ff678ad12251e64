//! Sampling probes for the assumptions behind the theory constants.
//!
//! Each probe draws random weights from its own seeded stream, compares an
//! observed statistic with a bound and returns a [`ProbeReport`]. Margins
//! are `bound - observed` with the absolute slack [`SLACK`] folded in, so a
//! report passes exactly when its worst margin is non-negative.

mod dissipativity;
mod gradcheck;
mod lipschitz;
mod moment;
mod poincare;
mod villani;

pub use dissipativity::{dissipativity_probe, dissipativity_probe_with};
pub use gradcheck::{grad_check, GradCheckOptions};
pub use lipschitz::{lipschitz_probe, lipschitz_probe_with_bound};
pub use moment::{estimate_kappa0, second_moment_probe};
pub use poincare::poincare_estimate_1d;
pub use villani::{laplacian, villani_g, villani_probe, VILLANI_RADII};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::nn::WeightMatrix;

/// Absolute tolerance separating violations from float noise.
pub const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub name: String,
    pub samples: u64,
    /// Worst observed value of the probed statistic.
    pub observed: f64,
    pub bound: f64,
    pub worst_margin: f64,
    pub pass: bool,
    pub details: Vec<String>,
    pub warnings: Vec<String>,
    /// Set when the probe declined to run; `pass` is then false.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refused: Option<String>,
    /// Raw per-sample values, when the probe has a natural table.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<Vec<f64>>,
}

impl ProbeReport {
    /// Report for a bound probe; passes iff `worst_margin >= 0`.
    pub fn new(name: &str, samples: u64, observed: f64, bound: f64, worst_margin: f64) -> Self {
        Self {
            name: name.into(),
            samples,
            observed,
            bound,
            worst_margin,
            pass: worst_margin >= 0.0,
            details: Vec::new(),
            warnings: Vec::new(),
            refused: None,
            series: Vec::new(),
        }
    }

    pub(crate) fn refused(name: &str, reason: String) -> Self {
        Self {
            name: name.into(),
            samples: 0,
            observed: f64::NAN,
            bound: f64::NAN,
            worst_margin: f64::NEG_INFINITY,
            pass: false,
            details: Vec::new(),
            warnings: Vec::new(),
            refused: Some(reason),
            series: Vec::new(),
        }
    }
}

/// Uniform random unit vector.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Random matrix with Frobenius norm `radius`.
pub(crate) fn random_at_radius<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, radius: f64) -> WeightMatrix {
    let v = random_direction(rng, rows * cols).into_iter().map(|x| radius * x).collect();
    WeightMatrix::from_vec(rows, cols, v).expect("shape matches")
}

/// Radius in `[0, r_max]`: uniform half the time, log-uniform over six
/// decades otherwise, so both small and large scales are visited.
pub(crate) fn mixed_radius<R: Rng + ?Sized>(rng: &mut R, r_max: f64) -> f64 {
    if rng.random::<bool>() {
        r_max * rng.random::<f64>()
    } else {
        r_max * 10f64.powf(-6.0 * rng.random::<f64>())
    }
}

/// Random matrix whose norm is drawn by [`mixed_radius`].
pub(crate) fn random_point<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, r_max: f64) -> WeightMatrix {
    let radius = mixed_radius(rng, r_max);
    random_at_radius(rng, rows, cols, radius)
}
