use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Tanh,
    Sigmoid,
}

/// A bounded smooth activation together with the constants the smoothness
/// and dissipativity bounds are expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationSpec {
    pub kind: ActivationKind,
    /// `sup |sigma|`
    #[serde(rename = "B_sigma")]
    pub bound: f64,
    /// Lipschitz constant of sigma.
    #[serde(rename = "L")]
    pub lipschitz: f64,
    /// `sup |sigma'|`
    #[serde(rename = "M_D")]
    pub max_slope: f64,
    /// `sup |sigma''|`
    #[serde(rename = "M_D_prime")]
    pub max_curvature: f64,
    /// Lipschitz constant of sigma'.
    #[serde(rename = "L_sigma_prime")]
    pub slope_lipschitz: f64,
    /// `sigma(0)`, broadcast over the hidden units.
    #[serde(rename = "c")]
    pub at_zero: f64,
}

/// Beyond this magnitude tanh is exactly +-1 in f64.
const TANH_SATURATION: f64 = 40.0;

impl ActivationSpec {
    pub fn tanh() -> Self {
        // sup |tanh''| = 4 / (3 sqrt 3), attained at tanh(z) = 1/sqrt(3).
        let curvature = 4.0 / (3.0 * 3f64.sqrt());
        Self {
            kind: ActivationKind::Tanh,
            bound: 1.0,
            lipschitz: 1.0,
            max_slope: 1.0,
            max_curvature: curvature,
            slope_lipschitz: curvature,
            at_zero: 0.0,
        }
    }

    pub fn sigmoid() -> Self {
        // sup |sigma''| = 1 / (6 sqrt 3), attained at sigma(z) = 1/2 +- 1/(2 sqrt 3).
        let curvature = 1.0 / (6.0 * 3f64.sqrt());
        Self {
            kind: ActivationKind::Sigmoid,
            bound: 1.0,
            lipschitz: 0.25,
            max_slope: 0.25,
            max_curvature: curvature,
            slope_lipschitz: curvature,
            at_zero: 0.5,
        }
    }

    pub fn of(kind: ActivationKind) -> Self {
        match kind {
            ActivationKind::Tanh => Self::tanh(),
            ActivationKind::Sigmoid => Self::sigmoid(),
        }
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        match self.kind {
            ActivationKind::Tanh => saturating_tanh(z),
            ActivationKind::Sigmoid => logistic(z),
        }
    }

    /// `(sigma(z), sigma'(z))`, sharing the transcendental evaluation.
    #[inline]
    pub fn eval_with_slope(&self, z: f64) -> (f64, f64) {
        match self.kind {
            ActivationKind::Tanh => {
                let t = saturating_tanh(z);
                (t, 1.0 - t * t)
            }
            ActivationKind::Sigmoid => {
                let g = logistic(z);
                (g, g * (1.0 - g))
            }
        }
    }

    #[inline]
    pub fn derivative(&self, z: f64) -> f64 {
        self.eval_with_slope(z).1
    }

    pub fn second_derivative(&self, z: f64) -> f64 {
        match self.kind {
            ActivationKind::Tanh => {
                let t = saturating_tanh(z);
                -2.0 * t * (1.0 - t * t)
            }
            ActivationKind::Sigmoid => {
                let g = logistic(z);
                g * (1.0 - g) * (1.0 - 2.0 * g)
            }
        }
    }
}

#[inline]
fn saturating_tanh(z: f64) -> f64 {
    if z > TANH_SATURATION {
        1.0
    } else if z < -TANH_SATURATION {
        -1.0
    } else {
        z.tanh()
    }
}

/// Overflow-free logistic function.
#[inline]
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}
