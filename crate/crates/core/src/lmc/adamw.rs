use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::chain::{make_record, Trajectory};
use super::init::{init_weights_with, Init};
use crate::nn::{Dataset, ProblemSpec, Workspace};
use crate::rng::{stream_rng, Purpose};
use crate::{Error, Result};

/// Minibatch AdamW on the unregularized data term with decoupled decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub n_steps: usize,
    pub seed: u64,
    #[serde(default)]
    pub chain: u64,
    pub init: Init,
    pub record_stride: usize,
}

impl AdamWConfig {
    /// Common defaults (`beta = (0.9, 0.999)`, `eps = 1e-8`, batch 16) with the
    /// problem's lambda as decoupled decay.
    pub fn for_problem(spec: &ProblemSpec, lr: f64, n_steps: usize, seed: u64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: spec.lambda(),
            batch_size: 16.min(spec.n()),
            n_steps,
            seed,
            chain: 0,
            init: Init::Zero,
            record_stride: 1,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidParameter("AdamW betas must lie in [0, 1)".into()));
        }
        if self.batch_size == 0 || self.batch_size > n {
            return Err(Error::InvalidParameter(format!("batch size {} must be in 1..={n}", self.batch_size)));
        }
        if self.lr < 0.0 || self.eps <= 0.0 || self.weight_decay < 0.0 || self.record_stride == 0 {
            return Err(Error::InvalidParameter("AdamW needs lr >= 0, eps > 0, decay >= 0, stride >= 1".into()));
        }
        Ok(())
    }
}

/// Trains with AdamW and records the regularized train (and test) loss like
/// [`run_chain`](super::run_chain). Record times are `step * lr`.
pub fn run_adamw(spec: &ProblemSpec, cfg: &AdamWConfig, test: Option<&Dataset>) -> Result<Trajectory> {
    cfg.validate(spec.n())?;
    let (p, d) = (spec.width(), spec.input_dim());
    let mut w = init_weights_with(p, d, cfg.init, &mut stream_rng(cfg.seed, cfg.chain, Purpose::Init));
    let mut batch_rng = stream_rng(cfg.seed, cfg.chain, Purpose::Minibatch);
    let mut first = vec![0.0; p * d];
    let mut second = vec![0.0; p * d];
    let mut grad = vec![0.0; p * d];
    let mut ws = Workspace::default();
    let scale = 1.0 / cfg.batch_size as f64;

    let mut records = vec![make_record(spec, test, 0, 0.0, &w, false, None)?];
    let (mut pow1, mut pow2) = (1.0, 1.0);
    for k in 1..=cfg.n_steps {
        grad.fill(0.0);
        let batch = index::sample(&mut batch_rng, spec.n(), cfg.batch_size);
        spec.accumulate_data_gradient(&w, batch.into_iter(), scale, &mut grad, &mut ws);
        pow1 *= cfg.beta1;
        pow2 *= cfg.beta2;
        let decay = 1.0 - cfg.lr * cfg.weight_decay;
        for (((wi, gi), mi), vi) in w.as_mut_slice().iter_mut().zip(&grad).zip(&mut first).zip(&mut second) {
            *wi *= decay;
            *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * gi;
            *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * gi * gi;
            let m_hat = *mi / (1.0 - pow1);
            let v_hat = *vi / (1.0 - pow2);
            *wi -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
        if !w.is_finite() {
            return Err(Error::Divergence { step: k });
        }
        if k % cfg.record_stride == 0 || k == cfg.n_steps {
            records.push(make_record(spec, test, k, k as f64 * cfg.lr, &w, false, None)?);
        }
    }
    Ok(Trajectory { step_size: cfg.lr, records, final_weights: w, warnings: Vec::new() })
}

/// One full-batch AdamW update from zero moments, for checking by hand.
#[cfg(test)]
pub(crate) fn single_step(w: f64, g: f64, cfg: &AdamWConfig) -> f64 {
    let m = (1.0 - cfg.beta1) * g / (1.0 - cfg.beta1);
    let v = (1.0 - cfg.beta2) * g * g / (1.0 - cfg.beta2);
    w * (1.0 - cfg.lr * cfg.weight_decay) - cfg.lr * m / (v.sqrt() + cfg.eps)
}
