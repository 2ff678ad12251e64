use std::f64::consts::SQRT_2;

use crate::nn::{ProblemSpec, WeightMatrix};
use crate::{Error, Result};

/// `w <- w - drift * g + sqrt(2) * increment`, shared by the step and its
/// interpolation so both round identically.
#[inline]
pub(crate) fn langevin_update(w: &mut [f64], g: &[f64], drift: f64, increment: &[f64]) {
    for ((wi, gi), bi) in w.iter_mut().zip(g).zip(increment) {
        *wi = *wi - drift * *gi + SQRT_2 * *bi;
    }
}

/// One LMC step on `2 L / s`:
/// `W - (2h/s) grad L(W) + sqrt(2) (B_{(k+1)h} - B_{kh})`.
///
/// `noise` is the Brownian increment, i.e. i.i.d. `N(0, h)` entries.
pub fn lmc_step(spec: &ProblemSpec, w: &WeightMatrix, h: f64, s: f64, noise: &WeightMatrix) -> Result<WeightMatrix> {
    check_step_params(h, s)?;
    let g = spec.gradient(w)?;
    noise.check_shape(w.rows(), w.cols())?;
    let mut next = w.clone();
    langevin_update(next.as_mut_slice(), g.as_slice(), 2.0 * h / s, noise.as_slice());
    if !next.is_finite() {
        return Err(Error::Divergence { step: 1 });
    }
    Ok(next)
}

/// Continuous-time interpolation between `kh` and `(k+1)h`:
/// `W_kh - (2 t / s) grad + sqrt(2) (B_{kh+t} - B_kh)` for `t` in `[0, h]`.
pub fn interpolate(
    w_kh: &WeightMatrix,
    grad_at_kh: &WeightMatrix,
    s: f64,
    h: f64,
    t_offset: f64,
    increment: &WeightMatrix,
) -> Result<WeightMatrix> {
    check_step_params(h, s)?;
    if !(0.0..=h).contains(&t_offset) {
        return Err(Error::InvalidParameter(format!("t_offset {t_offset} outside [0, {h}]")));
    }
    grad_at_kh.check_shape(w_kh.rows(), w_kh.cols())?;
    increment.check_shape(w_kh.rows(), w_kh.cols())?;
    let mut out = w_kh.clone();
    langevin_update(out.as_mut_slice(), grad_at_kh.as_slice(), 2.0 * t_offset / s, increment.as_slice());
    Ok(out)
}

pub(crate) fn check_step_params(h: f64, s: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {h}")));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("temperature scale must be positive, got {s}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{ActivationSpec, DataBounds, Dataset, LossKind};

    #[test]
    fn pure_regularizer_contracts_linearly() {
        let spec = ProblemSpec::pure_regularizer(2, 2, 3.0).unwrap();
        let w = WeightMatrix::from_vec(2, 2, vec![1.0, -2.0, 0.5, 4.0]).unwrap();
        let (h, s) = (0.01, 0.5);
        let next = lmc_step(&spec, &w, h, s, &WeightMatrix::zeros(2, 2)).unwrap();
        assert!(next.max_abs_diff(&w.scaled(1.0 - 2.0 * h * 3.0 / s)) < 1e-15);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        // lambda is tiny and W = 0 with symmetric data: gradient exactly zero
        let data = Dataset::from_rows(&[(vec![0.3], 0.0)]).unwrap();
        let spec = ProblemSpec::new(ActivationSpec::tanh(), LossKind::Mse, vec![1.0], data, 1e-3, DataBounds::default()).unwrap();
        let w = WeightMatrix::zeros(1, 1);
        assert_eq!(lmc_step(&spec, &w, 0.1, 1.0, &WeightMatrix::zeros(1, 1)).unwrap(), w);
    }

    #[test]
    fn scalar_recurrence_by_hand() {
        let data = Dataset::from_rows(&[(vec![0.4], 0.5)]).unwrap();
        let spec = ProblemSpec::new(ActivationSpec::tanh(), LossKind::Mse, vec![2.0], data, 2.0, DataBounds::default()).unwrap();
        let (w0, h, s, xi) = (0.5f64, 0.01f64, 0.2f64, 0.03f64);
        let t = (0.2f64).tanh();
        let grad = -(0.5 - 2.0 * t) * 2.0 * (1.0 - t * t) * 0.4 + 2.0 * w0;
        let expected = w0 - 2.0 * h / s * grad + 2f64.sqrt() * xi;
        let w = WeightMatrix::from_vec(1, 1, vec![w0]).unwrap();
        let noise = WeightMatrix::from_vec(1, 1, vec![xi]).unwrap();
        let got = lmc_step(&spec, &w, h, s, &noise).unwrap();
        assert!((got[(0, 0)] - expected).abs() < 1e-15);
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let data = Dataset::from_rows(&[(vec![0.4, -0.1], 0.5), (vec![0.2, 0.3], -0.2)]).unwrap();
        let spec =
            ProblemSpec::new(ActivationSpec::tanh(), LossKind::Mse, vec![2.0, -1.0], data, 2.0, DataBounds::default()).unwrap();
        let w = WeightMatrix::from_fn(2, 2, |k, j| 0.3 * k as f64 - 0.2 * j as f64 + 0.1);
        let g = spec.gradient(&w).unwrap();
        let (h, s) = (0.05, 0.3);
        let zero = WeightMatrix::zeros(2, 2);
        let noise = WeightMatrix::from_vec(2, 2, vec![0.01, -0.02, 0.003, 0.04]).unwrap();

        assert_eq!(interpolate(&w, &g, s, h, 0.0, &zero).unwrap(), w);
        assert_eq!(interpolate(&w, &g, s, h, h, &noise).unwrap(), lmc_step(&spec, &w, h, s, &noise).unwrap());
        let mid = interpolate(&w, &g, s, h, h / 2.0, &zero).unwrap();
        assert!(mid.max_abs_diff(&w.add_scaled(&g, -h / s)) < 1e-16);
        assert!(interpolate(&w, &g, s, h, 1.5 * h, &zero).is_err());
        assert!(interpolate(&w, &g, s, h, -1e-9, &zero).is_err());
    }
}
