use serde::{Deserialize, Serialize};

use super::{random_at_radius, ProbeReport};
use crate::nn::{ProblemSpec, WeightMatrix};
use crate::rng::{stream_rng, Purpose};
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckOptions {
    pub trials: usize,
    pub fd_step: f64,
    /// Trial weights are drawn with Frobenius norm uniform in `[0, radius]`.
    pub radius: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self { trials: 100, fd_step: 1e-5, radius: 5.0, tolerance: 1e-5, seed: 0 }
    }
}

/// Compares the analytic gradient with 5-point central differences of the
/// loss. The error of entry `j` is `|g_j - fd_j| / max(|g_j|, |fd_j|, floor)`
/// with `floor = 1e-3 ||g||_inf`, so entries that are tiny relative to the
/// rest of the gradient are judged on the gradient's own scale.
pub fn grad_check(spec: &ProblemSpec, opts: &GradCheckOptions) -> Result<ProbeReport> {
    if opts.trials == 0 || !(opts.fd_step > 0.0) {
        return Err(Error::InvalidParameter("grad_check needs trials >= 1 and fd_step > 0".into()));
    }
    let (p, d) = (spec.width(), spec.input_dim());
    let errors = par::try_map_indexed(opts.trials, |t| {
        let mut rng = stream_rng(opts.seed, t as u64, Purpose::Probe);
        let radius = opts.radius * rand::Rng::random::<f64>(&mut rng);
        let w = random_at_radius(&mut rng, p, d, radius);
        trial_error(spec, &w, opts.fd_step)
    })?;
    let (worst_trial, worst) =
        errors.iter().cloned().enumerate().fold((0, 0.0), |acc, (i, e)| if e > acc.1 { (i, e) } else { acc });
    let mut report = ProbeReport::new("grad_check", opts.trials as u64, worst, opts.tolerance, opts.tolerance - worst);
    report.details.push(format!("worst relative error {worst:e} in trial {worst_trial}"));
    Ok(report)
}

fn trial_error(spec: &ProblemSpec, w: &WeightMatrix, h: f64) -> Result<f64> {
    let analytic = spec.gradient(w)?;
    let numeric = five_point_gradient(spec, w, h)?;
    let scale = analytic.as_slice().iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let floor = (1e-3 * scale).max(f64::MIN_POSITIVE);
    Ok(analytic
        .as_slice()
        .iter()
        .zip(&numeric)
        .map(|(a, n)| {
            let diff = (a - n).abs();
            if diff == 0.0 {
                0.0
            } else {
                diff / a.abs().max(n.abs()).max(floor)
            }
        })
        .fold(0.0, f64::max))
}

pub(crate) fn five_point_gradient(spec: &ProblemSpec, w: &WeightMatrix, h: f64) -> Result<Vec<f64>> {
    let mut probe = w.clone();
    let mut out = Vec::with_capacity(w.len());
    for j in 0..w.len() {
        let base = w.as_slice()[j];
        let mut at = |offset: f64| {
            probe.as_mut_slice()[j] = base + offset;
            spec.empirical_loss(&probe)
        };
        let (f2, f1, b1, b2) = (at(2.0 * h)?, at(h)?, at(-h)?, at(-2.0 * h)?);
        probe.as_mut_slice()[j] = base;
        out.push((-f2 + 8.0 * f1 - 8.0 * b1 + b2) / (12.0 * h));
    }
    Ok(out)
}
