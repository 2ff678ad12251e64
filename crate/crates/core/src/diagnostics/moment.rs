use super::{ProbeReport, SLACK};
use crate::lmc::Trajectory;
use crate::nn::WeightMatrix;
use crate::theory::TheoryConstants;
use crate::{Error, Result};

/// Ensembles smaller than this get a warning.
pub const MIN_CHAINS: usize = 100;

/// `log mean exp(||W||^2)` over initial draws, computed stably.
///
/// Fails with a precondition error when the estimate looks divergent: a
/// single draw carries more than half of the sum, or the estimate keeps
/// climbing across nested subsamples (1/16, 1/4, all) by more than 0.25.
pub fn estimate_kappa0(init_samples: &[WeightMatrix]) -> Result<f64> {
    if init_samples.is_empty() {
        return Err(Error::InvalidParameter("kappa0 needs at least one initial draw".into()));
    }
    let logs: Vec<f64> = init_samples.iter().map(|w| w.frob_sq()).collect();
    let estimate = |xs: &[f64]| {
        let top = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = xs.iter().map(|x| (x - top).exp()).sum();
        (top + (sum / xs.len() as f64).ln(), 1.0 / sum)
    };
    let (kappa, top_share) = estimate(&logs);
    if logs.len() > 1 && top_share > 0.5 {
        return Err(Error::Precondition(format!(
            "largest initial draw holds {:.0}% of the exponential moment; kappa0 looks divergent",
            100.0 * top_share
        )));
    }
    if logs.len() >= 64 {
        let k16 = estimate(&logs[..logs.len() / 16]).0;
        let k4 = estimate(&logs[..logs.len() / 4]).0;
        if k16 < k4 && k4 < kappa && kappa - k16 > 0.25 {
            return Err(Error::Precondition(format!(
                "kappa0 estimate keeps growing with sample size ({k16:.3} -> {k4:.3} -> {kappa:.3})"
            )));
        }
    }
    Ok(kappa.max(0.0))
}

/// Compares the ensemble mean of `||W_kh||^2` at every recorded step with
/// `kappa0 + 2 max(1, 1/m)(b + 2B^2 + pds/2)`, `kappa0` estimated from
/// `init_samples`. Chains must share their recording schedule.
pub fn second_moment_probe(
    ensemble: &[Trajectory],
    constants: &TheoryConstants,
    param_count: usize,
    s: f64,
    init_samples: &[WeightMatrix],
) -> Result<ProbeReport> {
    const NAME: &str = "second_moment";
    let first = ensemble.first().ok_or(Error::NoSnapshots)?;
    let kappa0 = match estimate_kappa0(init_samples) {
        Ok(k) => k,
        Err(Error::Precondition(reason)) => return Ok(ProbeReport::refused(NAME, reason)),
        Err(e) => return Err(e),
    };
    let steps: Vec<usize> = first.records.iter().map(|r| r.step).collect();
    let mut sums = vec![0.0; steps.len()];
    for t in ensemble {
        if t.records.len() != steps.len() || t.records.iter().zip(&steps).any(|(r, k)| r.step != *k) {
            return Err(Error::InvalidParameter("chains in the ensemble record different steps".into()));
        }
        for (acc, r) in sums.iter_mut().zip(&t.records) {
            *acc += r.frob_norm_sq;
        }
    }
    let chains = ensemble.len() as f64;
    let (worst_idx, worst) =
        sums.iter()
            .map(|x| x / chains)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let bound = constants.second_moment_bound(param_count, s, kappa0);
    let mut report = ProbeReport::new(NAME, (steps.len() * ensemble.len()) as u64, worst, bound, bound + SLACK - worst);
    report.details.push(format!("kappa0 estimate {kappa0:.6}"));
    report.details.push(format!("largest ensemble mean {worst:.6e} at step {}", steps[worst_idx]));

    let drift = 2.0 * first.step_size / s;
    let limit = constants.drift_step_limit();
    if drift >= limit {
        report.warnings.push(format!("precondition: 2h/s = {drift:e} is not below {limit:e}"));
    }
    if ensemble.len() < MIN_CHAINS {
        report.warnings.push(format!("only {} chains; at least {MIN_CHAINS} are expected", ensemble.len()));
    }
    Ok(report)
}
