//! End-to-end runs on the sine regression task and their file outputs.

mod config;
mod data;
mod diagnose;
mod gibbs_check;
mod plot;
mod suite;
mod sweep;

pub use config::{DiagnoseConfig, ExperimentConfig, GibbsCheckConfig, InitChoice, LambdaChoice, Optimizer, Task};
pub use data::{
    fixed_outer_weights, generate_sine_data, sine_problem, sine_target, task_data, to_labels, SINE_INPUT_BOUND, SINE_TARGET_BOUND,
};
pub use diagnose::{moment_probe, run_diagnostics, villani_closed_form_probe, DiagnoseReport};
pub use gibbs_check::{gibbs_check, gibbs_check_problem, GibbsCheckReport, GibbsCheckRow};
pub use plot::{curves_csv, emit_plots, rows_csv, svg_plot};
pub use suite::{
    below_threshold_run, check_below_threshold, check_noise_sweep, check_optimizers, check_width_sweep, constants_report,
    run_sweep, Check, ConstantsEntry, ConstantsReport, SweepOutcome, BELOW_THRESHOLD_LAMBDA,
};
pub use sweep::{
    best_over_grid, compare_optimizers, mean_final_train_by_noise, noise_sweep, run_cell, run_trajectories, width_sweep, Curve,
    ExperimentResults, PairRow, Setting, SummaryRow,
};
