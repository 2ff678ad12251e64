use std::io::Write;

use log::warn;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::init::{init_weights_with, Init};
use super::step::{check_step_params, langevin_update};
use crate::nn::{Dataset, ProblemSpec, WeightMatrix, Workspace};
use crate::rng::{stream_rng, Purpose};
use crate::theory::TheoryConstants;
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LmcConfig {
    /// Step size `h`.
    pub step_size: f64,
    /// Temperature scale `s`.
    pub temperature: f64,
    pub n_steps: usize,
    pub seed: u64,
    /// Chain id; selects the random stream.
    #[serde(default)]
    pub chain: u64,
    pub init: Init,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    /// Keep a copy of `W` in every record.
    #[serde(default)]
    pub keep_snapshots: bool,
    /// Also draw one interpolated iterate per step (see [`StepView`]).
    #[serde(default)]
    pub interpolated_snapshots: bool,
}

fn default_stride() -> usize {
    1
}

impl LmcConfig {
    pub fn new(step_size: f64, temperature: f64, n_steps: usize, seed: u64) -> Self {
        Self {
            step_size,
            temperature,
            n_steps,
            seed,
            chain: 0,
            init: Init::Zero,
            record_stride: 1,
            keep_snapshots: false,
            interpolated_snapshots: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_step_params(self.step_size, self.temperature)?;
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be at least 1".into()));
        }
        if self.init.variance() < 0.0 {
            return Err(Error::InvalidParameter("initial variance must be non-negative".into()));
        }
        Ok(())
    }

    /// Drift coefficient `2h/s` in front of the gradient.
    pub fn drift(&self) -> f64 {
        2.0 * self.step_size / self.temperature
    }
}

/// What an observer sees after step `k`.
pub struct StepView<'a> {
    pub step: usize,
    pub weights: &'a WeightMatrix,
    /// The interpolated iterate `W_t` at a uniformly drawn `t` in
    /// `[(k-1)h, kh)`, sampled jointly with the step's Brownian increment via
    /// a Brownian bridge. Present only when requested and `k >= 1`.
    pub interpolated: Option<&'a WeightMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub step: usize,
    pub time: f64,
    pub train_loss: f64,
    pub test_loss: Option<f64>,
    pub frob_norm_sq: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpolated: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub step_size: f64,
    pub records: Vec<Record>,
    pub final_weights: WeightMatrix,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn first(&self) -> &Record {
        &self.records[0]
    }

    pub fn last(&self) -> &Record {
        self.records.last().expect("trajectories always hold the initial record")
    }

    /// CSV with columns `step,time,train_loss,test_loss,frob_norm_sq`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "step,time,train_loss,test_loss,frob_norm_sq")?;
        for r in &self.records {
            let test = r.test_loss.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{},{}", r.step, r.time, r.train_loss, test, r.frob_norm_sq)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Warns when `2h/s` is outside the region where the second-moment bound is
/// proven. Sampling proceeds either way.
pub(crate) fn step_condition_warning(spec: &ProblemSpec, drift: f64, s: f64) -> Option<String> {
    let constants = TheoryConstants::compute(spec, spec.n(), s).ok()?;
    let limit = constants.drift_step_limit();
    (drift >= limit)
        .then(|| format!("2h/s = {drift:e} is not below min(1, m/(4 beta^2)) = {limit:e}; moment bound not guaranteed"))
}

/// Runs one chain, calling `observe` at step 0 and after every update.
/// Returns the final iterate and any warnings.
pub fn run_chain_observed<F>(spec: &ProblemSpec, cfg: &LmcConfig, mut observe: F) -> Result<(WeightMatrix, Vec<String>)>
where
    F: FnMut(StepView<'_>) -> Result<()>,
{
    cfg.validate()?;
    let warnings: Vec<String> = step_condition_warning(spec, cfg.drift(), cfg.temperature).into_iter().collect();
    // Ensembles share the condition; log it once.
    if cfg.chain == 0 {
        warnings.iter().for_each(|w| warn!("{w}"));
    }
    let (p, d) = (spec.width(), spec.input_dim());
    let mut w = init_weights_with(p, d, cfg.init, &mut stream_rng(cfg.seed, cfg.chain, Purpose::Init));
    let mut noise_rng = stream_rng(cfg.seed, cfg.chain, Purpose::Noise);
    let mut interp_rng = stream_rng(cfg.seed, cfg.chain, Purpose::Interpolation);

    let h = cfg.step_size;
    let sd = h.sqrt();
    let drift = cfg.drift();
    let mut grad = WeightMatrix::zeros(p, d);
    let mut noise = vec![0.0; p * d];
    let mut ws = Workspace::default();
    let mut interp = cfg.interpolated_snapshots.then(|| (WeightMatrix::zeros(p, d), vec![0.0; p * d]));

    observe(StepView { step: 0, weights: &w, interpolated: None })?;
    for k in 1..=cfg.n_steps {
        spec.gradient_into(&w, &mut grad, &mut ws)?;
        for z in noise.iter_mut() {
            *z = sd * noise_rng.sample::<f64, _>(StandardNormal);
        }
        if let Some((w_t, incr)) = interp.as_mut() {
            // B_tau - B_0 given B_h - B_0 = noise: Brownian bridge.
            let tau = h * interp_rng.random::<f64>();
            let bridge_sd = (tau * (h - tau) / h).sqrt();
            for (b, n) in incr.iter_mut().zip(&noise) {
                *b = tau / h * n + bridge_sd * interp_rng.sample::<f64, _>(StandardNormal);
            }
            w_t.as_mut_slice().copy_from_slice(w.as_slice());
            langevin_update(w_t.as_mut_slice(), grad.as_slice(), 2.0 * tau / cfg.temperature, incr);
        }
        langevin_update(w.as_mut_slice(), grad.as_slice(), drift, &noise);
        if !w.is_finite() {
            return Err(Error::Divergence { step: k });
        }
        observe(StepView { step: k, weights: &w, interpolated: interp.as_ref().map(|(w_t, _)| w_t) })?;
    }
    Ok((w, warnings))
}

pub(crate) fn make_record(
    spec: &ProblemSpec,
    test: Option<&Dataset>,
    step: usize,
    time: f64,
    w: &WeightMatrix,
    snapshot: bool,
    interpolated: Option<&WeightMatrix>,
) -> Result<Record> {
    let train_loss = spec.empirical_loss(w)?;
    if !train_loss.is_finite() {
        return Err(Error::Divergence { step });
    }
    Ok(Record {
        step,
        time,
        train_loss,
        test_loss: test.map(|t| spec.loss_on(t, w)).transpose()?,
        frob_norm_sq: w.frob_sq(),
        snapshot: snapshot.then(|| w.as_slice().to_vec()),
        interpolated: interpolated.map(|v| v.as_slice().to_vec()),
    })
}

/// Runs one chain and records losses every `record_stride` steps (and at
/// the final step).
pub fn run_chain(spec: &ProblemSpec, cfg: &LmcConfig, test: Option<&Dataset>) -> Result<Trajectory> {
    let mut records = Vec::new();
    let stride = cfg.record_stride.max(1);
    let (final_weights, warnings) = run_chain_observed(spec, cfg, |view| {
        if view.step % stride == 0 || view.step == cfg.n_steps {
            records.push(make_record(
                spec,
                test,
                view.step,
                view.step as f64 * cfg.step_size,
                view.weights,
                cfg.keep_snapshots,
                if cfg.keep_snapshots { view.interpolated } else { None },
            )?);
        }
        Ok(())
    })?;
    Ok(Trajectory { step_size: cfg.step_size, records, final_weights, warnings })
}

/// Runs `chains` independent chains with ids `cfg.chain .. cfg.chain + chains`,
/// in parallel when the `parallel` feature is on. Output order is chain order.
pub fn run_ensemble(spec: &ProblemSpec, cfg: &LmcConfig, chains: usize, test: Option<&Dataset>) -> Result<Vec<Trajectory>> {
    par::try_map_indexed(chains, |j| run_chain(spec, &LmcConfig { chain: cfg.chain + j as u64, ..*cfg }, test))
}

pub fn run_ensemble_sequential(
    spec: &ProblemSpec,
    cfg: &LmcConfig,
    chains: usize,
    test: Option<&Dataset>,
) -> Result<Vec<Trajectory>> {
    par::map_indexed_sequential(chains, |j| run_chain(spec, &LmcConfig { chain: cfg.chain + j as u64, ..*cfg }, test))
        .into_iter()
        .collect()
}
