//! Closed-form constants of the regularized depth-2 losses.
//!
//! Every function here is a direct evaluation of a bound in terms of the
//! activation constants, the outer weights and the data bounds. The
//! [`diagnostics`](crate::diagnostics) module checks them by sampling.

use serde::{Deserialize, Serialize};

use crate::nn::{LossKind, ProblemSpec};
use crate::{Error, Result};

/// All derived scalars for one problem. `radon_nikodym` is evaluated for the
/// stored `n` and `s`; it overflows to infinity for very small `s`, so its
/// logarithm is kept as well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub lambda_c: f64,
    pub beta: f64,
    pub alpha: f64,
    pub m: f64,
    pub b: f64,
    #[serde(rename = "A")]
    pub origin_loss: f64,
    #[serde(rename = "B")]
    pub origin_grad: f64,
    #[serde(rename = "C_L")]
    pub radon_nikodym: f64,
    #[serde(rename = "log_C_L")]
    pub log_radon_nikodym: f64,
    pub n: usize,
    pub s: f64,
}

impl TheoryConstants {
    pub fn compute(spec: &ProblemSpec, n: usize, s: f64) -> Result<Self> {
        let (m, b) = dissipativity(spec)?;
        let (origin_loss, origin_grad) = origin_bounds(spec);
        Ok(Self {
            lambda_c: critical_lambda(spec),
            beta: beta_bound(spec),
            alpha: alpha_lipschitz(spec),
            m,
            b,
            origin_loss,
            origin_grad,
            radon_nikodym: radon_nikodym_bound(spec, n, s)?,
            log_radon_nikodym: log_radon_nikodym_bound(spec, n, s)?,
            n,
            s,
        })
    }

    /// Upper limit on `2h/s` under which the second-moment bound is proven:
    /// `min(1, m / (4 beta^2))`.
    pub fn drift_step_limit(&self) -> f64 {
        1f64.min(self.m / (4.0 * self.beta * self.beta))
    }

    /// `kappa0 + 2 max(1, 1/m) (b + 2B^2 + p d s / 2)`
    pub fn second_moment_bound(&self, param_count: usize, s: f64, kappa0: f64) -> f64 {
        let pds = param_count as f64 * s;
        kappa0 + 2.0 * 1f64.max(1.0 / self.m) * (self.b + 2.0 * self.origin_grad * self.origin_grad + pds / 2.0)
    }
}

/// Regularization threshold above which the loss is a Villani function:
/// `2 M_D L B_x^2 ||a||^2` (MSE) or `M_D L B_x^2 ||a||^2 / 2` (BCE).
pub fn critical_lambda(spec: &ProblemSpec) -> f64 {
    let act = spec.activation();
    let a2 = spec.outer_norm().powi(2);
    let core = act.max_slope * act.lipschitz * spec.bound_x().powi(2) * a2;
    match spec.loss_kind() {
        LossKind::Mse => 2.0 * core,
        LossKind::Bce => core / 2.0,
    }
}

/// Gradient-Lipschitz bound of the regularized empirical loss.
pub fn beta_bound(spec: &ProblemSpec) -> f64 {
    let act = spec.activation();
    let p = spec.width() as f64;
    let sp = p.sqrt();
    let a = spec.outer_norm();
    let bx = spec.bound_x();
    let lambda = spec.lambda();
    match spec.loss_kind() {
        LossKind::Mse => {
            let by = spec.bound_y();
            sp * (a * bx * by * act.slope_lipschitz
                + sp * a * a * act.max_slope.powi(2) * bx * bx
                + p * a * a * bx * bx * act.max_curvature * act.bound
                + lambda)
        }
        LossKind::Bce => {
            // ||c||_2 of the broadcast bias vector
            let c_norm = sp * act.at_zero.abs();
            sp * (sp * a * act.max_slope.powi(2) * bx / 4.0
                + (2.0 + c_norm + a * act.bound) / 4.0 * act.max_curvature * bx * p
                + lambda)
        }
    }
}

/// Lipschitz constant of the unregularized per-example loss.
pub fn alpha_lipschitz(spec: &ProblemSpec) -> f64 {
    let act = spec.activation();
    let sp = (spec.width() as f64).sqrt();
    let a = spec.outer_norm();
    let bx = spec.bound_x();
    match spec.loss_kind() {
        LossKind::Mse => sp * (a * bx * spec.bound_y() * act.max_slope + bx * sp * a * a * act.bound * act.max_slope),
        LossKind::Bce => sp * a * bx * act.max_slope * (sp / 2.0 + sp * a * act.bound * bx / 4.0),
    }
}

/// `(m, b) = (lambda / 2, alpha^2 / (2 lambda))`
pub fn dissipativity(spec: &ProblemSpec) -> Result<(f64, f64)> {
    dissipativity_from(alpha_lipschitz(spec), spec.lambda())
}

pub fn dissipativity_from(alpha: f64, lambda: f64) -> Result<(f64, f64)> {
    if lambda <= 0.0 {
        return Err(Error::InvalidParameter("dissipativity needs lambda > 0".into()));
    }
    Ok((lambda / 2.0, alpha * alpha / (2.0 * lambda)))
}

/// Bounds `(A, B)` on `|L_i(0)|` and `||grad L_i(0)||`.
pub fn origin_bounds(spec: &ProblemSpec) -> (f64, f64) {
    let act = spec.activation();
    let ac = spec.outer_dot_bias().abs();
    let scale = (spec.width() as f64).sqrt() * spec.outer_norm() * spec.bound_x() * act.max_slope;
    match spec.loss_kind() {
        LossKind::Mse => {
            let r = spec.bound_y() + ac;
            (r * r / 2.0, scale * r)
        }
        LossKind::Bce => (crate::nn::softplus(ac), scale * crate::nn::logistic(ac)),
    }
}

/// Bound on the Radon-Nikodym derivative between Gibbs measures whose
/// datasets differ in one example, with the partition-function ratio taken
/// as 1.
pub fn radon_nikodym_bound(spec: &ProblemSpec, n: usize, s: f64) -> Result<f64> {
    Ok(log_radon_nikodym_bound(spec, n, s)?.exp())
}

pub fn log_radon_nikodym_bound(spec: &ProblemSpec, n: usize, s: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    let reach = spec.width() as f64 * spec.outer_max_abs() * spec.activation().bound;
    let gap = match spec.loss_kind() {
        LossKind::Mse => 0.5 * (spec.bound_y() + reach).powi(2),
        // log((1 + e^r) / (1 + e^{-r})) / 2, in overflow-free form
        LossKind::Bce => 0.5 * (crate::nn::softplus(reach) - crate::nn::softplus(-reach)),
    };
    Ok(2.0 / (s * n as f64) * gap)
}

/// Inputs of the excess-risk bound that are not loss constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskBoundInputs {
    pub width: usize,
    pub input_dim: usize,
    pub s: f64,
    pub n: usize,
    pub eps: f64,
    /// Poincare constant of the Gibbs measure (not computable; supplied).
    pub c_pi: f64,
    /// `log E_{pi_0} exp(||W||^2)` of the initial law.
    pub kappa0: f64,
}

/// The three terms of the expected excess-risk bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskBoundTerms {
    pub stability: f64,
    pub gibbs_gap: f64,
    pub sampling: f64,
}

impl RiskBoundTerms {
    pub fn total(&self) -> f64 {
        self.stability + self.gibbs_gap + self.sampling
    }
}

/// `C3 / n` with `C3 = 16 sqrt 2 (beta^2 (b + spd/2)/m + B^2) C_PI sqrt(C_L) / s`.
pub fn stability_constant(c: &TheoryConstants, pd: f64, s: f64, c_pi: f64) -> f64 {
    16.0 * 2f64.sqrt() * (c.beta * c.beta * (c.b + s * pd / 2.0) / c.m + c.origin_grad.powi(2)) * c_pi * c.radon_nikodym.sqrt()
        / s
}

pub fn excess_risk_terms(c: &TheoryConstants, inputs: &RiskBoundInputs) -> Result<RiskBoundTerms> {
    let RiskBoundInputs { width, input_dim, s, n, eps, c_pi, kappa0 } = *inputs;
    if width == 0 || input_dim == 0 || n == 0 {
        return Err(Error::InvalidParameter("width, input dimension and n must be positive".into()));
    }
    if !(s > 0.0) || eps < 0.0 || c_pi < 0.0 || kappa0 < 0.0 {
        return Err(Error::InvalidParameter("s must be positive and eps, C_PI, kappa0 non-negative".into()));
    }
    let s_max = 2f64.min(c.m);
    if s > s_max {
        return Err(Error::Precondition(format!("s = {s} exceeds min(2, m) = {s_max}")));
    }
    let pd = (width * input_dim) as f64;
    let spd = s * pd;
    let stability = stability_constant(c, pd, s, c_pi) / n as f64;
    let gibbs_gap = spd / 4.0 * (std::f64::consts::E * c.beta / c.m * (2.0 * c.b / spd + 1.0)).ln();
    let moment = kappa0 + 2.0 * 1f64.max(1.0 / c.m) * (c.b + 2.0 * c.origin_grad.powi(2) + spd / 2.0);
    let sampling = (c.beta * moment.sqrt() + c.origin_grad) * 2.0 * c_pi * eps;
    Ok(RiskBoundTerms { stability, gibbs_gap, sampling })
}

pub fn excess_risk_bound(c: &TheoryConstants, inputs: &RiskBoundInputs) -> Result<f64> {
    Ok(excess_risk_terms(c, inputs)?.total())
}
