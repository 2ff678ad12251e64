use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::Task;
use crate::nn::{ActivationSpec, DataBounds, Dataset, ProblemSpec};
use crate::rng::{stream_rng, Purpose};
use crate::Result;

/// Input bound of the sine task.
pub const SINE_INPUT_BOUND: f64 = 0.5;
/// Target bound of the noiseless sine task.
pub const SINE_TARGET_BOUND: f64 = 2.0;

pub fn sine_target(x: f64) -> f64 {
    2.0 * (PI * x).sin()
}

/// `x ~ U[-1/2, 1/2]`, `y = 2 sin(pi x) + noise_sigma * N(0, 1)`.
///
/// Inputs and standard-normal draws depend only on `seed`, so datasets with
/// different noise levels share them.
pub fn generate_sine_data(n_train: usize, n_test: usize, noise_sigma: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let draw = |n: usize, stream: u64| {
        let mut rng = stream_rng(seed, stream, Purpose::Data);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let x = rng.random::<f64>() - 0.5;
            let eps: f64 = rng.sample(StandardNormal);
            xs.push(x);
            ys.push(sine_target(x) + noise_sigma * eps);
        }
        Dataset::new(1, xs, ys)
    };
    Ok((draw(n_train, 0)?, draw(n_test, 1)?))
}

/// Labels `sign(y)` with `sign(0) = +1`.
pub fn to_labels(data: &Dataset) -> Result<Dataset> {
    let xs: Vec<f64> = (0..data.len()).flat_map(|i| data.x(i).to_vec()).collect();
    let ys = data.targets().iter().map(|y| if *y >= 0.0 { 1.0 } else { -1.0 }).collect();
    Dataset::new(data.dim(), xs, ys)
}

/// `a_i = 2 / sqrt(p)`, so `||a|| = 2` at every width.
pub fn fixed_outer_weights(width: usize) -> Vec<f64> {
    vec![2.0 / (width as f64).sqrt(); width]
}

/// Train/test sets for a task, labels already converted for classification.
pub fn task_data(task: Task, n_train: usize, n_test: usize, noise_sigma: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = generate_sine_data(n_train, n_test, noise_sigma, seed)?;
    match task {
        Task::Regression => Ok((train, test)),
        Task::Classification => Ok((to_labels(&train)?, to_labels(&test)?)),
    }
}

/// The sine-task network: tanh units, fixed outer weights, `B_x = 1/2` and,
/// without noise, `B_y = 2`.
pub fn sine_problem(task: Task, width: usize, train: Dataset, lambda: f64, noiseless: bool) -> Result<ProblemSpec> {
    let bounds = DataBounds { input: Some(SINE_INPUT_BOUND), target: noiseless.then_some(SINE_TARGET_BOUND) };
    ProblemSpec::new(ActivationSpec::tanh(), task.loss(), fixed_outer_weights(width), train, lambda, bounds)
}
