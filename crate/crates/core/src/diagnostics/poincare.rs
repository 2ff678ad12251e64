use std::f64::consts::PI;

use crate::gibbs::Density;
use crate::{Error, Result};

/// Lower estimate of the Poincare constant of a 1D grid density:
/// `max Var[h] / E[h'^2]` over the first `family_size` test functions.
///
/// The family is the constant, then alternately the standardized monomials
/// `z, z^2, ...` and the cosine modes `cos(k pi (x - lo) / L)`. Derivatives
/// are central differences on the cell centers.
pub fn poincare_estimate_1d(density: &impl Density, family_size: usize) -> Result<f64> {
    let grid = density.grid();
    if grid.dim() != 1 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    let axis = grid.axes()[0];
    let masses = density.masses();
    let xs: Vec<f64> = (0..axis.bins).map(|i| axis.center(i)).collect();
    let mean: f64 = xs.iter().zip(masses).map(|(x, m)| x * m).sum();
    let sd = xs.iter().zip(masses).map(|(x, m)| m * (x - mean).powi(2)).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let span = axis.hi - axis.lo;

    let mut best = 0.0f64;
    for j in 1..family_size {
        let k = j.div_ceil(2);
        let h: Vec<f64> = if j % 2 == 1 {
            xs.iter().map(|x| ((x - mean) / sd).powi(k as i32)).collect()
        } else {
            xs.iter().map(|x| (k as f64 * PI * (x - axis.lo) / span).cos()).collect()
        };
        let dh = finite_difference(&h, axis.width());
        let m1: f64 = h.iter().zip(masses).map(|(v, m)| v * m).sum();
        let var: f64 = h.iter().zip(masses).map(|(v, m)| m * (v - m1).powi(2)).sum();
        let energy: f64 = dh.iter().zip(masses).map(|(v, m)| m * v * v).sum();
        if energy > 0.0 {
            best = best.max(var / energy);
        }
    }
    Ok(best)
}

fn finite_difference(h: &[f64], dx: f64) -> Vec<f64> {
    let n = h.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| match i {
            0 => (h[1] - h[0]) / dx,
            _ if i == n - 1 => (h[n - 1] - h[n - 2]) / dx,
            _ => (h[i + 1] - h[i - 1]) / (2.0 * dx),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{Grid, GridDensity};

    fn gaussian(var: f64) -> GridDensity {
        let sd = var.sqrt();
        GridDensity::from_fn(Grid::uniform_1d(-8.0 * sd, 8.0 * sd, 2000).unwrap(), |x| (-x[0] * x[0] / (2.0 * var)).exp())
            .unwrap()
    }

    #[test]
    fn gaussian_constant_is_its_variance() {
        for var in [0.25, 1.0, 3.0] {
            let c = poincare_estimate_1d(&gaussian(var), 8).unwrap();
            assert!((c / var - 1.0).abs() < 0.02, "{var}: {c}");
        }
    }

    #[test]
    fn uniform_reaches_first_cosine_mode() {
        let l = 3.0;
        let uniform = GridDensity::from_fn(Grid::uniform_1d(0.0, l, 1000).unwrap(), |_| 1.0).unwrap();
        let c = poincare_estimate_1d(&uniform, 3).unwrap();
        assert!(c >= (l / PI).powi(2) * (1.0 - 1e-3), "{c}");
    }

    #[test]
    fn constants_only_give_zero_and_family_is_monotone() {
        let g = gaussian(1.0);
        assert_eq!(poincare_estimate_1d(&g, 1).unwrap(), 0.0);
        let values: Vec<f64> = (1..10).map(|k| poincare_estimate_1d(&g, k).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[1] >= w[0]));
    }
}
