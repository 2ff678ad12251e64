//! Network evaluation, regularized empirical losses and their gradients.

use super::activation::{logistic, softplus};
use super::problem::{Dataset, LossKind, ProblemSpec};
use super::weights::WeightMatrix;
use crate::{Error, Result};

/// Reusable scratch space for gradient evaluation.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    weighted_slopes: Vec<f64>,
}

impl ProblemSpec {
    /// `f(x; a, W) = <a, sigma(W x)>`
    pub fn forward(&self, x: &[f64], w: &WeightMatrix) -> Result<f64> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: x.len() });
        }
        self.check_weights(w)?;
        Ok(self.forward_unchecked(x, w))
    }

    pub(crate) fn check_weights(&self, w: &WeightMatrix) -> Result<()> {
        w.check_shape(self.width(), self.input_dim())
    }

    #[inline]
    fn forward_unchecked(&self, x: &[f64], w: &WeightMatrix) -> f64 {
        let act = self.activation();
        self.outer().iter().enumerate().map(|(k, a)| a * act.eval(dot(w.row(k), x))).sum()
    }

    #[inline]
    fn pointwise_loss(&self, y: f64, f: f64) -> f64 {
        match self.loss_kind() {
            LossKind::Mse => 0.5 * (y - f) * (y - f),
            LossKind::Bce => softplus(-y * f),
        }
    }

    /// `d loss / d f` at prediction `f`.
    #[inline]
    fn pointwise_slope(&self, y: f64, f: f64) -> f64 {
        match self.loss_kind() {
            LossKind::Mse => -(y - f),
            // -y / (1 + e^{y f}) = -y * logistic(-y f)
            LossKind::Bce => -y * logistic(-y * f),
        }
    }

    fn regularizer(&self, w: &WeightMatrix) -> f64 {
        0.5 * self.lambda() * w.frob_sq()
    }

    /// Mean data loss over `data` without the regularizer.
    pub fn data_loss_on(&self, data: &Dataset, w: &WeightMatrix) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if data.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: data.dim() });
        }
        self.check_weights(w)?;
        let total: f64 = (0..data.len()).map(|i| self.pointwise_loss(data.y(i), self.forward_unchecked(data.x(i), w))).sum();
        Ok(total / data.len() as f64)
    }

    /// Regularized loss `(1/n) sum_i loss_i(W) + (lambda/2) ||W||_F^2` over `data`.
    pub fn loss_on(&self, data: &Dataset, w: &WeightMatrix) -> Result<f64> {
        Ok(self.data_loss_on(data, w)? + self.regularizer(w))
    }

    /// Regularized empirical loss on the training set.
    pub fn empirical_loss(&self, w: &WeightMatrix) -> Result<f64> {
        self.loss_on(self.data(), w)
    }

    /// Unregularized mean training loss.
    pub fn data_loss(&self, w: &WeightMatrix) -> Result<f64> {
        self.data_loss_on(self.data(), w)
    }

    /// Regularized loss of the single example `i`.
    pub fn example_loss(&self, i: usize, w: &WeightMatrix) -> Result<f64> {
        self.check_example(i)?;
        self.check_weights(w)?;
        let data = self.data();
        Ok(self.pointwise_loss(data.y(i), self.forward_unchecked(data.x(i), w)) + self.regularizer(w))
    }

    fn check_example(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::InvalidParameter(format!("example index {i} out of range for n = {}", self.n())));
        }
        Ok(())
    }

    /// Gradient of [`empirical_loss`](Self::empirical_loss).
    pub fn gradient(&self, w: &WeightMatrix) -> Result<WeightMatrix> {
        let mut out = WeightMatrix::zeros(self.width(), self.input_dim());
        self.gradient_into(w, &mut out, &mut Workspace::default())?;
        Ok(out)
    }

    /// Writes the full regularized gradient into `out`.
    pub fn gradient_into(&self, w: &WeightMatrix, out: &mut WeightMatrix, ws: &mut Workspace) -> Result<()> {
        self.check_weights(w)?;
        self.check_weights(out)?;
        let scale = 1.0 / self.n() as f64;
        let g = out.as_mut_slice();
        g.fill(0.0);
        self.accumulate_data_gradient(w, 0..self.n(), scale, g, ws);
        self.add_regularizer_gradient(w, g);
        Ok(())
    }

    /// Gradient of the regularized single-example loss `i`.
    pub fn example_gradient(&self, i: usize, w: &WeightMatrix) -> Result<WeightMatrix> {
        self.check_example(i)?;
        self.check_weights(w)?;
        let mut out = WeightMatrix::zeros(self.width(), self.input_dim());
        self.accumulate_data_gradient(w, i..i + 1, 1.0, out.as_mut_slice(), &mut Workspace::default());
        self.add_regularizer_gradient(w, out.as_mut_slice());
        Ok(out)
    }

    fn add_regularizer_gradient(&self, w: &WeightMatrix, g: &mut [f64]) {
        let lambda = self.lambda();
        for (gi, wi) in g.iter_mut().zip(w.as_slice()) {
            *gi += lambda * wi;
        }
    }

    /// Adds `scale * sum_{i in indices} grad loss_i(W)` (data term only) into
    /// `g` and returns `scale * sum_i loss_i(W)`. Shapes must already be
    /// validated.
    pub(crate) fn accumulate_data_gradient(
        &self,
        w: &WeightMatrix,
        indices: impl Iterator<Item = usize>,
        scale: f64,
        g: &mut [f64],
        ws: &mut Workspace,
    ) -> f64 {
        let act = *self.activation();
        let a = self.outer();
        let d = self.input_dim();
        let data = self.data();
        ws.weighted_slopes.resize(a.len(), 0.0);
        let mut loss = 0.0;
        for i in indices {
            let x = data.x(i);
            let mut f = 0.0;
            for (k, (ak, slot)) in a.iter().zip(ws.weighted_slopes.iter_mut()).enumerate() {
                let (value, slope) = act.eval_with_slope(dot(w.row(k), x));
                f += ak * value;
                *slot = ak * slope;
            }
            let y = data.y(i);
            loss += self.pointwise_loss(y, f);
            let r = scale * self.pointwise_slope(y, f);
            for (row, ws_k) in g.chunks_exact_mut(d).zip(&ws.weighted_slopes) {
                let coef = r * ws_k;
                for (gj, xj) in row.iter_mut().zip(x) {
                    *gj += coef * xj;
                }
            }
        }
        scale * loss
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{ActivationSpec, DataBounds};

    fn spec(act: ActivationSpec, loss: LossKind, outer: Vec<f64>, rows: &[(Vec<f64>, f64)], lambda: f64) -> ProblemSpec {
        ProblemSpec::new(act, loss, outer, Dataset::from_rows(rows).unwrap(), lambda, DataBounds::default()).unwrap()
    }

    /// `tanh(x) = (e^{2x}-1)/(e^{2x}+1)` with `e^{2x}` summed from its power series.
    fn series_tanh(x: f64) -> f64 {
        let mut term = 1.0;
        let mut e2x = 1.0;
        for k in 1..60 {
            term *= 2.0 * x / k as f64;
            e2x += term;
        }
        (e2x - 1.0) / (e2x + 1.0)
    }

    #[test]
    fn forward_examples() {
        let tanh = ActivationSpec::tanh();
        let s = spec(tanh, LossKind::Mse, vec![3.0, -1.0], &[(vec![1.0, 2.0], 0.0)], 1.0);
        assert_eq!(s.forward(&[5.0, -3.0], &WeightMatrix::zeros(2, 2)).unwrap(), 0.0);

        let sig = spec(ActivationSpec::sigmoid(), LossKind::Mse, vec![1.0, 1.0], &[(vec![1.0], 0.0)], 1.0);
        assert_eq!(sig.forward(&[0.7], &WeightMatrix::zeros(2, 1)).unwrap(), 1.0);

        let one = spec(tanh, LossKind::Mse, vec![2.0], &[(vec![0.4], 0.5)], 2.0);
        let w = WeightMatrix::from_vec(1, 1, vec![0.5]).unwrap();
        let f = one.forward(&[0.4], &w).unwrap();
        assert!((f - 2.0 * series_tanh(0.2)).abs() < 1e-15);
        assert!((f - 0.3947506).abs() < 1e-7);

        assert!(matches!(one.forward(&[0.4, 1.0], &w), Err(Error::DimensionMismatch { .. })));
        assert!(one.forward(&[0.4], &WeightMatrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn loss_examples() {
        let rows = [(vec![0.1], 1.5), (vec![-0.3], -0.5), (vec![0.2], 2.0)];
        let mse = spec(ActivationSpec::tanh(), LossKind::Mse, vec![1.0, 2.0], &rows, 0.7);
        let expected = rows.iter().map(|r| r.1 * r.1 / 2.0).sum::<f64>() / 3.0;
        assert!((mse.empirical_loss(&WeightMatrix::zeros(2, 1)).unwrap() - expected).abs() < 1e-15);

        let labels = [(vec![0.1], 1.0), (vec![-0.3], -1.0)];
        let bce = spec(ActivationSpec::tanh(), LossKind::Bce, vec![1.0, 2.0], &labels, 0.7);
        assert!((bce.empirical_loss(&WeightMatrix::zeros(2, 1)).unwrap() - 2f64.ln()).abs() < 1e-15);

        let one = spec(ActivationSpec::tanh(), LossKind::Mse, vec![2.0], &[(vec![0.4], 0.5)], 2.0);
        let w = WeightMatrix::from_vec(1, 1, vec![0.5]).unwrap();
        let direct = 0.5 * (0.5 - 2.0 * series_tanh(0.2)).powi(2) + 0.25;
        let got = one.empirical_loss(&w).unwrap();
        assert!((got - direct).abs() < 1e-15);
        assert!((got - 0.2555387).abs() < 1e-7);

        let empty = Dataset::new(1, vec![], vec![]).unwrap();
        assert!(matches!(one.loss_on(&empty, &w), Err(Error::EmptyDataset)));
    }

    #[test]
    fn pure_regularizer_gradient_is_lambda_w() {
        let s = ProblemSpec::pure_regularizer(3, 2, 1.7).unwrap();
        let w = WeightMatrix::from_fn(3, 2, |k, j| (k as f64 - 1.0) * 0.3 + j as f64);
        assert_eq!(s.gradient(&w).unwrap(), w.scaled(1.7));
    }

    #[test]
    fn bce_gradient_at_zero() {
        let rows = [(vec![0.1, 0.4], 1.0), (vec![-0.3, 0.2], -1.0), (vec![0.5, -0.5], -1.0)];
        let a = vec![0.5, -2.0];
        let s = spec(ActivationSpec::tanh(), LossKind::Bce, a.clone(), &rows, 0.3);
        let g = s.gradient(&WeightMatrix::zeros(2, 2)).unwrap();
        for (k, ak) in a.iter().enumerate() {
            for j in 0..2 {
                let expected: f64 = rows.iter().map(|r| -r.1 * ak * r.0[j]).sum::<f64>() / (2.0 * 3.0);
                assert!((g[(k, j)] - expected).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn example_gradients_average_to_full_gradient() {
        let rows = [(vec![0.1, 0.4], 1.0), (vec![-0.3, 0.2], -0.4), (vec![0.5, -0.5], 0.9)];
        let s = spec(ActivationSpec::sigmoid(), LossKind::Mse, vec![0.5, -2.0, 1.0], &rows, 0.3);
        let w = WeightMatrix::from_fn(3, 2, |k, j| 0.3 * k as f64 - 0.7 * j as f64 + 0.1);
        let mut avg = WeightMatrix::zeros(3, 2);
        for i in 0..3 {
            avg = avg.add_scaled(&s.example_gradient(i, &w).unwrap(), 1.0 / 3.0);
        }
        assert!(avg.max_abs_diff(&s.gradient(&w).unwrap()) < 1e-15);
        let mean_loss: f64 = (0..3).map(|i| s.example_loss(i, &w).unwrap()).sum::<f64>() / 3.0;
        assert!((mean_loss - s.empirical_loss(&w).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn saturated_bce_stays_finite() {
        let s = spec(ActivationSpec::tanh(), LossKind::Bce, vec![500.0], &[(vec![1.0], -1.0)], 0.1);
        let w = WeightMatrix::from_vec(1, 1, vec![100.0]).unwrap();
        let loss = s.empirical_loss(&w).unwrap();
        assert!((loss - (500.0 + 0.05 * 1e4)).abs() < 1e-9);
        assert!(s.gradient(&w).unwrap().is_finite());
    }
}
