use serde::Serialize;

use super::config::{ExperimentConfig, Optimizer};
use super::data::{sine_problem, task_data};
use crate::lmc::{run_adamw, run_ensemble, run_ensemble_sequential, AdamWConfig, LmcConfig, Trajectory};
use crate::nn::{Dataset, ProblemSpec};
use crate::theory::critical_lambda;
use crate::{par, Error, Result};

/// Recorded losses of one run, averaged over chains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub label: String,
    pub steps: Vec<usize>,
    pub train: Vec<f64>,
    pub test: Vec<f64>,
    pub frob_sq: Vec<f64>,
}

impl Curve {
    pub fn from_trajectories(label: String, runs: &[Trajectory]) -> Self {
        let first = &runs[0];
        let k = runs.len() as f64;
        let mean = |f: &dyn Fn(&crate::lmc::Record) -> f64| -> Vec<f64> {
            (0..first.records.len()).map(|i| runs.iter().map(|t| f(&t.records[i])).sum::<f64>() / k).collect()
        };
        Self {
            label,
            steps: first.records.iter().map(|r| r.step).collect(),
            train: mean(&|r| r.train_loss),
            test: mean(&|r| r.test_loss.unwrap_or(f64::NAN)),
            frob_sq: mean(&|r| r.frob_norm_sq),
        }
    }

    pub fn initial_test(&self) -> f64 {
        self.test[0]
    }

    pub fn final_test(&self) -> f64 {
        *self.test.last().expect("curves are non-empty")
    }

    pub fn final_train(&self) -> f64 {
        *self.train.last().expect("curves are non-empty")
    }
}

/// One (width, noise, seed, optimizer) setting after the learning-rate search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub optimizer: Optimizer,
    pub width: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub lambda: f64,
    pub lambda_c: f64,
    pub below_threshold: bool,
    /// No learning rate in the grid survived.
    pub diverged: bool,
    pub diverged_lrs: usize,
    pub best_lr: f64,
    pub initial_train: f64,
    pub initial_test: f64,
    pub final_train: f64,
    pub final_test: f64,
    /// Test losses without the regularizer.
    pub initial_test_data: f64,
    pub final_test_data: f64,
}

/// Paired LMC/AdamW outcome on identical data. Both the regularized test
/// loss (the LMC objective) and the data term alone (what AdamW descends,
/// its decay acting outside the loss) are reported.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRow {
    pub width: usize,
    pub noise_sigma: f64,
    pub lmc_lr: f64,
    pub adamw_lr: f64,
    pub lmc_initial_test: f64,
    pub lmc_final_test: f64,
    pub adamw_initial_test: f64,
    pub adamw_final_test: f64,
    /// `adamw_final_test / lmc_final_test`
    pub ratio: f64,
    pub lmc_initial_test_data: f64,
    pub lmc_final_test_data: f64,
    pub adamw_initial_test_data: f64,
    pub adamw_final_test_data: f64,
    pub data_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResults {
    pub name: String,
    pub curves: Vec<Curve>,
    pub summary: Vec<SummaryRow>,
    pub pairs: Vec<PairRow>,
}

/// Problem and test set for one setting.
pub struct Setting {
    pub spec: ProblemSpec,
    pub test: Dataset,
    pub lambda_c: f64,
    pub width: usize,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Setting {
    pub fn new(cfg: &ExperimentConfig, width: usize, noise_sigma: f64, seed: u64) -> Result<Self> {
        let (train, test) = task_data(cfg.task, cfg.n_train, cfg.n_test, noise_sigma, seed)?;
        // lambda only scales the regularizer, so any positive value gives lambda_c.
        let probe = sine_problem(cfg.task, width, train, 1.0, noise_sigma == 0.0)?;
        let lambda_c = critical_lambda(&probe);
        let spec = probe.with_lambda(cfg.lambda.resolve(lambda_c))?;
        Ok(Self { spec, test, lambda_c, width, noise_sigma, seed })
    }
}

/// Per-chain trajectories of one optimizer at one learning rate. LMC chains
/// run on the rayon pool when `parallel_chains` is set.
pub fn run_trajectories(
    cfg: &ExperimentConfig,
    setting: &Setting,
    optimizer: Optimizer,
    lr: f64,
    parallel_chains: bool,
) -> Result<Vec<Trajectory>> {
    let init = cfg.init.for_width(setting.width);
    match optimizer {
        Optimizer::Lmc => {
            let lmc = LmcConfig {
                init,
                record_stride: cfg.record_stride,
                ..LmcConfig::new(lr * cfg.s / 2.0, cfg.s, cfg.n_steps, setting.seed)
            };
            if parallel_chains {
                run_ensemble(&setting.spec, &lmc, cfg.chains, Some(&setting.test))
            } else {
                run_ensemble_sequential(&setting.spec, &lmc, cfg.chains, Some(&setting.test))
            }
        }
        Optimizer::Adamw => (0..cfg.chains as u64)
            .map(|chain| {
                let adamw = AdamWConfig {
                    init,
                    chain,
                    record_stride: cfg.record_stride,
                    batch_size: cfg.adamw_batch.min(setting.spec.n()),
                    ..AdamWConfig::for_problem(&setting.spec, lr, cfg.n_steps, setting.seed)
                };
                run_adamw(&setting.spec, &adamw, Some(&setting.test))
            })
            .collect(),
    }
}

/// Runs one optimizer at one learning rate; `None` if a chain diverged.
pub fn run_cell(cfg: &ExperimentConfig, setting: &Setting, optimizer: Optimizer, lr: f64) -> Result<Option<Curve>> {
    let label = format!("{optimizer:?} p={} sigma={} lr={lr}", setting.width, setting.noise_sigma).to_lowercase();
    match run_trajectories(cfg, setting, optimizer, lr, false) {
        Ok(runs) => Ok(Some(Curve::from_trajectories(label, &runs))),
        Err(Error::Divergence { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Grid search over `cfg.lr_grid`, keeping the rate with the lowest final
/// train loss.
pub fn best_over_grid(cfg: &ExperimentConfig, setting: &Setting, optimizer: Optimizer) -> Result<(SummaryRow, Option<Curve>)> {
    let cells = par::try_map_indexed(cfg.lr_grid.len(), |i| run_cell(cfg, setting, optimizer, cfg.lr_grid[i]))?;
    Ok(summarize(cfg, setting, optimizer, cells))
}

fn summarize(
    cfg: &ExperimentConfig,
    setting: &Setting,
    optimizer: Optimizer,
    cells: Vec<Option<Curve>>,
) -> (SummaryRow, Option<Curve>) {
    let diverged_lrs = cells.iter().filter(|c| c.is_none()).count();
    let best = cells
        .into_iter()
        .zip(&cfg.lr_grid)
        .filter_map(|(c, lr)| c.map(|c| (*lr, c)))
        .filter(|(_, c)| c.final_train().is_finite())
        .min_by(|a, b| a.1.final_train().total_cmp(&b.1.final_train()));
    let lambda = setting.spec.lambda();
    let mut row = SummaryRow {
        experiment: String::new(),
        optimizer,
        width: setting.width,
        noise_sigma: setting.noise_sigma,
        seed: setting.seed,
        lambda,
        lambda_c: setting.lambda_c,
        below_threshold: lambda <= setting.lambda_c,
        diverged: best.is_none(),
        diverged_lrs,
        best_lr: f64::NAN,
        initial_train: f64::NAN,
        initial_test: f64::NAN,
        final_train: f64::NAN,
        final_test: f64::NAN,
        initial_test_data: f64::NAN,
        final_test_data: f64::NAN,
    };
    let curve = best.map(|(lr, c)| {
        row.best_lr = lr;
        row.initial_train = c.train[0];
        row.initial_test = c.initial_test();
        row.final_train = c.final_train();
        row.final_test = c.final_test();
        row.initial_test_data = c.initial_test() - lambda / 2.0 * c.frob_sq[0];
        row.final_test_data = c.final_test() - lambda / 2.0 * c.frob_sq.last().expect("non-empty");
        c
    });
    (row, curve)
}

fn finish(name: &str, rows: Vec<(SummaryRow, Option<Curve>)>, pairs: Vec<PairRow>) -> ExperimentResults {
    let mut curves = Vec::new();
    let summary = rows
        .into_iter()
        .map(|(mut row, curve)| {
            row.experiment = name.into();
            curves.extend(curve);
            row
        })
        .collect();
    ExperimentResults { name: name.into(), curves, summary, pairs }
}

/// Best-rate curves and summaries for every width in `cfg.widths`, at
/// `cfg.noise_sigma` and `cfg.seed`, with `cfg.optimizer`.
pub fn width_sweep(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    cfg.validate()?;
    let rows = cfg
        .widths
        .iter()
        .map(|&p| best_over_grid(cfg, &Setting::new(cfg, p, cfg.noise_sigma, cfg.seed)?, cfg.optimizer))
        .collect::<Result<Vec<_>>>()?;
    Ok(finish("width_sweep", rows, Vec::new()))
}

/// Label-noise sweep at the first width: one row per noise level and seed
/// (`cfg.seed .. cfg.seed + noise_seeds`). Curves are kept for the first seed.
pub fn noise_sweep(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    cfg.validate()?;
    let width = cfg.widths[0];
    let mut rows = Vec::new();
    for &sigma in &cfg.noise_levels {
        for j in 0..cfg.noise_seeds.max(1) as u64 {
            let (row, curve) = best_over_grid(cfg, &Setting::new(cfg, width, sigma, cfg.seed + j)?, cfg.optimizer)?;
            rows.push((row, if j == 0 { curve } else { None }));
        }
    }
    Ok(finish("noise_sweep", rows, Vec::new()))
}

/// Seed-averaged final train loss per noise level, in `noise_levels` order.
pub fn mean_final_train_by_noise(results: &ExperimentResults) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for row in results.summary.iter().filter(|r| !r.diverged) {
        match out.iter_mut().find(|(s, _, _)| *s == row.noise_sigma) {
            Some(entry) => {
                entry.1 += row.final_train;
                entry.2 += 1;
            }
            None => out.push((row.noise_sigma, row.final_train, 1)),
        }
    }
    out.into_iter().map(|(s, total, k)| (s, total / k as f64)).collect()
}

/// LMC and AdamW on identical data and seeds, best rate each, at the first width.
pub fn compare_optimizers(cfg: &ExperimentConfig) -> Result<ExperimentResults> {
    cfg.validate()?;
    let setting = Setting::new(cfg, cfg.widths[0], cfg.noise_sigma, cfg.seed)?;
    let lmc = best_over_grid(cfg, &setting, Optimizer::Lmc)?;
    let adamw = best_over_grid(cfg, &setting, Optimizer::Adamw)?;
    let (l, a) = (&lmc.0, &adamw.0);
    let pair = PairRow {
        width: setting.width,
        noise_sigma: setting.noise_sigma,
        lmc_lr: l.best_lr,
        adamw_lr: a.best_lr,
        lmc_initial_test: l.initial_test,
        lmc_final_test: l.final_test,
        adamw_initial_test: a.initial_test,
        adamw_final_test: a.final_test,
        ratio: a.final_test / l.final_test,
        lmc_initial_test_data: l.initial_test_data,
        lmc_final_test_data: l.final_test_data,
        adamw_initial_test_data: a.initial_test_data,
        adamw_final_test_data: a.final_test_data,
        data_ratio: a.final_test_data / l.final_test_data,
    };
    Ok(finish("compare_optimizers", vec![lmc, adamw], vec![pair]))
}
