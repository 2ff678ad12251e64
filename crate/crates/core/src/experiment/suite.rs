use serde::Serialize;

use super::config::{ExperimentConfig, LambdaChoice, Task};
use super::sweep::{compare_optimizers, mean_final_train_by_noise, noise_sweep, width_sweep, ExperimentResults, Setting};
use crate::theory::TheoryConstants;
use crate::Result;

/// Lambda of the below-threshold run.
pub const BELOW_THRESHOLD_LAMBDA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Self { name: name.into(), pass, detail }
    }
}

/// Every width's final test loss is below half its initial test loss.
pub fn check_width_sweep(results: &ExperimentResults) -> Check {
    let ratios: Vec<(usize, f64)> = results.summary.iter().map(|r| (r.width, r.final_test / r.initial_test)).collect();
    let pass = !ratios.is_empty() && ratios.iter().all(|(_, q)| *q < 0.5);
    Check::new("test loss halves at every width", pass, format!("final/initial test loss by width: {ratios:?}"))
}

/// Seed-averaged final train loss does not decrease as label noise grows.
pub fn check_noise_sweep(results: &ExperimentResults) -> Check {
    let mut means = mean_final_train_by_noise(results);
    means.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pass = means.len() >= 2 && means.windows(2).all(|w| w[1].1 >= w[0].1);
    Check::new("train loss non-decreasing in label noise", pass, format!("mean final train loss by sigma: {means:?}"))
}

/// LMC halves its regularized test loss and AdamW halves the data term it
/// descends.
pub fn check_optimizers(results: &ExperimentResults) -> Check {
    let Some(pair) = results.pairs.first() else {
        return Check::new("both optimizers halve their test objective", false, "no paired row".into());
    };
    let lmc = pair.lmc_final_test / pair.lmc_initial_test;
    let adamw = pair.adamw_final_test_data / pair.adamw_initial_test_data;
    Check::new(
        "both optimizers halve their test objective",
        lmc < 0.5 && adamw < 0.5,
        format!("LMC regularized ratio {lmc:.4}, AdamW data-term ratio {adamw:.4}"),
    )
}

pub fn check_below_threshold(results: &ExperimentResults) -> Check {
    let pass = !results.summary.is_empty() && results.summary.iter().all(|r| r.below_threshold && !r.diverged);
    Check::new("below-threshold run completes and is labeled", pass, format!("{} rows", results.summary.len()))
}

/// The width sweep at `lambda = 0.5` and the first width.
pub fn below_threshold_run(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    let below =
        ExperimentConfig { lambda: LambdaChoice::Value(BELOW_THRESHOLD_LAMBDA), widths: vec![cfg.widths[0]], ..cfg.clone() };
    let mut results = width_sweep(&below)?;
    results.name = "below_threshold".into();
    for row in &mut results.summary {
        row.experiment = results.name.clone();
    }
    Ok(results)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub results: Vec<ExperimentResults>,
    pub checks: Vec<Check>,
}

impl SweepOutcome {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Width sweep, noise sweep, optimizer comparison and the below-threshold run.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    let widths = width_sweep(cfg)?;
    let noise = noise_sweep(cfg)?;
    let optimizers = compare_optimizers(cfg)?;
    let below = below_threshold_run(cfg)?;
    let checks =
        vec![check_width_sweep(&widths), check_noise_sweep(&noise), check_optimizers(&optimizers), check_below_threshold(&below)];
    Ok(SweepOutcome { results: vec![widths, noise, optimizers, below], checks })
}

/// Theory constants of one configured width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsEntry {
    pub width: usize,
    pub lambda: f64,
    pub below_threshold: bool,
    #[serde(flatten)]
    pub constants: TheoryConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub task: Task,
    pub entries: Vec<ConstantsEntry>,
    pub checks: Vec<Check>,
}

/// Constants for every width on the configured training set, with the
/// structural identities `m = lambda/2`, `b = alpha^2/(2 lambda)` and
/// `beta >= lambda` checked.
pub fn constants_report(cfg: &ExperimentConfig) -> Result<ConstantsReport> {
    cfg.validate()?;
    let mut entries = Vec::new();
    let mut checks = Vec::new();
    for &p in &cfg.widths {
        let setting = Setting::new(cfg, p, cfg.noise_sigma, cfg.seed)?;
        let lambda = setting.spec.lambda();
        let c = TheoryConstants::compute(&setting.spec, setting.spec.n(), cfg.s)?;
        let identities = c.m == lambda / 2.0 && c.b == c.alpha * c.alpha / (2.0 * lambda) && c.beta >= lambda;
        let finite = [c.lambda_c, c.beta, c.alpha, c.m, c.b, c.origin_loss, c.origin_grad, c.log_radon_nikodym]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0);
        checks.push(Check::new(
            &format!("constants p={p}"),
            identities && finite,
            format!("lambda_c = {}, identities hold: {identities}, finite: {finite}", c.lambda_c),
        ));
        entries.push(ConstantsEntry { width: p, lambda, below_threshold: lambda <= c.lambda_c, constants: c });
    }
    Ok(ConstantsReport { task: cfg.task, entries, checks })
}
