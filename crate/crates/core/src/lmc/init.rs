use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::nn::WeightMatrix;
use crate::rng::{stream_rng, Purpose};

/// Initial law of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Init {
    Zero,
    /// i.i.d. `N(0, variance)` entries.
    Gaussian {
        variance: f64,
    },
}

impl Init {
    /// Gaussian entries with variance `1 / width`.
    pub fn inverse_width(width: usize) -> Self {
        Init::Gaussian { variance: 1.0 / width as f64 }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Init::Zero => 0.0,
            Init::Gaussian { variance } => *variance,
        }
    }
}

pub fn init_weights(rows: usize, cols: usize, init: Init, seed: u64) -> WeightMatrix {
    init_weights_with(rows, cols, init, &mut stream_rng(seed, 0, Purpose::Init))
}

pub fn init_weights_with<R: Rng + ?Sized>(rows: usize, cols: usize, init: Init, rng: &mut R) -> WeightMatrix {
    match init {
        Init::Zero => WeightMatrix::zeros(rows, cols),
        Init::Gaussian { variance } => {
            let sd = variance.sqrt();
            WeightMatrix::from_fn(rows, cols, |_, _| sd * rng.sample::<f64, _>(StandardNormal))
        }
    }
}
