use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::lmc::Init;
use crate::nn::LossKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Classification,
}

impl Task {
    pub fn loss(self) -> LossKind {
        match self {
            Task::Regression => LossKind::Mse,
            Task::Classification => LossKind::Bce,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Lmc,
    Adamw,
}

/// A fixed `lambda`, or the critical value plus a margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaChoice {
    Value(f64),
    AboveCritical { auto_above_critical: f64 },
}

impl LambdaChoice {
    pub fn resolve(self, lambda_c: f64) -> f64 {
        match self {
            LambdaChoice::Value(v) => v,
            LambdaChoice::AboveCritical { auto_above_critical } => lambda_c + auto_above_critical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitChoice {
    Zero,
    /// `N(0, 1/width)` entries.
    GaussianInverseWidth,
    Gaussian {
        variance: f64,
    },
}

impl InitChoice {
    pub fn for_width(self, width: usize) -> Init {
        match self {
            InitChoice::Zero => Init::Zero,
            InitChoice::GaussianInverseWidth => Init::inverse_width(width),
            InitChoice::Gaussian { variance } => Init::Gaussian { variance },
        }
    }
}

/// Settings of the desk-scale Gibbs convergence check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GibbsCheckConfig {
    pub outer: f64,
    pub x: f64,
    pub y: f64,
    pub lambda: f64,
    pub s: f64,
    pub step_size: f64,
    pub chains: usize,
    pub checkpoints: Vec<usize>,
    pub bins: usize,
    pub bootstrap: usize,
    pub poincare_family: usize,
    pub tv_target: f64,
}

impl Default for GibbsCheckConfig {
    fn default() -> Self {
        Self {
            outer: 2.0,
            x: 0.5,
            y: 2.0,
            lambda: 2.1,
            s: 1.0,
            step_size: 0.005,
            chains: 32,
            checkpoints: vec![1_000, 10_000, 100_000],
            bins: 200,
            bootstrap: 200,
            poincare_family: 12,
            tv_target: 0.05,
        }
    }
}

/// Settings of the `diagnose` probe suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub grad_widths: Vec<usize>,
    pub grad_trials: usize,
    pub probe_widths: Vec<usize>,
    pub pairs: usize,
    pub samples: usize,
    pub villani_width: usize,
    pub villani_radii: Vec<f64>,
    pub villani_directions: usize,
    pub moment_width: usize,
    pub moment_chains: usize,
    pub moment_steps: usize,
    pub moment_n_train: usize,
    pub moment_s: f64,
    /// Drift coefficient `2h/s` of the moment chains.
    pub moment_drift: f64,
    pub moment_record_stride: usize,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        Self {
            grad_widths: vec![1, 4, 16],
            grad_trials: 100,
            probe_widths: vec![1, 16, 64],
            pairs: 10_000,
            samples: 10_000,
            villani_width: 16,
            villani_radii: crate::diagnostics::VILLANI_RADII.to_vec(),
            villani_directions: 16,
            moment_width: 16,
            moment_chains: 100,
            moment_steps: 100_000,
            moment_n_train: 20,
            moment_s: 1e-4,
            moment_drift: 2e-5,
            moment_record_stride: 100,
        }
    }
}

/// One experiment run, loadable from JSON. Missing fields take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub widths: Vec<usize>,
    pub lambda: LambdaChoice,
    pub s: f64,
    /// Drift coefficients `2h/s`; the LMC step is `h = lr * s / 2`.
    pub lr_grid: Vec<f64>,
    pub n_steps: usize,
    pub chains: usize,
    pub noise_sigma: f64,
    pub noise_levels: Vec<f64>,
    pub noise_seeds: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub init: InitChoice,
    pub out_dir: PathBuf,
    pub n_train: usize,
    pub n_test: usize,
    pub record_stride: usize,
    pub adamw_batch: usize,
    pub gibbs: GibbsCheckConfig,
    pub diagnose: DiagnoseConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: Task::Regression,
            widths: vec![16, 64, 256],
            lambda: LambdaChoice::Value(2.1),
            s: 1e-4,
            lr_grid: vec![1e-3, 5e-3, 1e-2, 5e-2, 1e-1, 5e-1],
            n_steps: 1000,
            chains: 1,
            noise_sigma: 0.0,
            noise_levels: vec![0.0, 0.1, 0.3],
            noise_seeds: 5,
            seed: 0,
            optimizer: Optimizer::Lmc,
            init: InitChoice::GaussianInverseWidth,
            out_dir: PathBuf::from("out"),
            n_train: 200,
            n_test: 200,
            record_stride: 10,
            adamw_batch: 16,
            gibbs: GibbsCheckConfig::default(),
            diagnose: DiagnoseConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: Self = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.widths.is_empty() || self.widths.contains(&0) {
            return bad("widths must be non-empty and positive");
        }
        if self.lr_grid.is_empty() || self.lr_grid.iter().any(|lr| !(*lr >= 0.0 && lr.is_finite())) {
            return bad("lr_grid must be non-empty with finite non-negative entries");
        }
        if !(self.noise_sigma >= 0.0) || self.noise_levels.iter().any(|s| !(*s >= 0.0)) {
            return bad("noise levels must be non-negative");
        }
        if !(self.s > 0.0) {
            return bad("s must be positive");
        }
        if self.n_train == 0 || self.n_test == 0 || self.chains == 0 || self.record_stride == 0 || self.adamw_batch == 0 {
            return bad("n_train, n_test, chains, record_stride and adamw_batch must be positive");
        }
        Ok(())
    }
}
