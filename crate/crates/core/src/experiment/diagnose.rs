use serde::Serialize;

use super::config::{ExperimentConfig, Task};
use super::sweep::Setting;
use crate::diagnostics::{
    dissipativity_probe, dissipativity_probe_with, grad_check, lipschitz_probe, lipschitz_probe_with_bound, random_direction,
    second_moment_probe, villani_g, villani_probe, GradCheckOptions, ProbeReport,
};
use crate::lmc::{run_ensemble, LmcConfig};
use crate::nn::{ProblemSpec, WeightMatrix};
use crate::rng::{stream_rng, Purpose};
use crate::theory::{beta_bound, dissipativity, TheoryConstants};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnoseReport {
    pub constants: TheoryConstants,
    pub probes: Vec<ProbeReport>,
    pub pass: bool,
}

fn tagged(mut r: ProbeReport, tag: String) -> ProbeReport {
    r.name = format!("{} [{tag}]", r.name);
    r
}

/// A falsification run passes when the probe it wraps fails.
fn expect_failure(inner: ProbeReport) -> ProbeReport {
    let mut r = inner.clone();
    r.name = format!("{} self-test", inner.name);
    r.pass = !inner.pass && inner.refused.is_none();
    r.worst_margin = -inner.worst_margin;
    r.details.insert(0, "bound deliberately wrong; the probe must fail".into());
    r
}

/// Relative error of `villani_g` against `-lambda p d + lambda^2 ||W||^2 / s`
/// on the pure regularizer.
pub fn villani_closed_form_probe(width: usize, dim: usize, lambda: f64, s: f64, radii: &[f64], seed: u64) -> Result<ProbeReport> {
    let spec = ProblemSpec::pure_regularizer(width, dim, lambda)?;
    let mut rng = stream_rng(seed, 0, Purpose::Probe);
    let mut worst = 0.0f64;
    for &r in radii {
        let u = random_direction(&mut rng, width * dim);
        let w = WeightMatrix::from_vec(width, dim, u.iter().map(|x| r * x).collect())?;
        let exact = -lambda * (width * dim) as f64 + lambda * lambda * r * r / s;
        let got = villani_g(&spec, s, &w, &mut rng)?;
        worst = worst.max(((got - exact) / exact).abs());
    }
    let tol = 1e-3;
    Ok(ProbeReport::new("villani_closed_form", radii.len() as u64, worst, tol, tol - worst))
}

/// Every probe on the sine configuration plus the falsification runs.
pub fn run_diagnostics(cfg: &ExperimentConfig) -> Result<DiagnoseReport> {
    cfg.validate()?;
    let dc = &cfg.diagnose;
    let seed = cfg.seed;
    let mut probes = Vec::new();

    for task in [Task::Regression, Task::Classification] {
        let task_cfg = ExperimentConfig { task, ..cfg.clone() };
        for &p in &dc.grad_widths {
            let setting = Setting::new(&task_cfg, p, 0.0, seed)?;
            let opts = GradCheckOptions { trials: dc.grad_trials, seed, ..Default::default() };
            probes.push(tagged(grad_check(&setting.spec, &opts)?, format!("{task:?} p={p}")));
        }
        for &p in &dc.probe_widths {
            let setting = Setting::new(&task_cfg, p, 0.0, seed)?;
            let tag = format!("{task:?} p={p}");
            probes.push(tagged(lipschitz_probe(&setting.spec, dc.pairs, seed)?, tag.clone()));
            probes.push(tagged(dissipativity_probe(&setting.spec, dc.samples, seed)?, tag));
        }
    }

    let main = Setting::new(cfg, dc.villani_width, 0.0, seed)?;
    let spec = &main.spec;
    let tag = format!("{:?} p={}", cfg.task, dc.villani_width);
    let few = (dc.pairs / 10).max(10);
    probes.push(expect_failure(tagged(lipschitz_probe_with_bound(spec, few, seed, beta_bound(spec) / 1000.0)?, tag.clone())));
    let (m, b) = dissipativity(spec)?;
    probes.push(expect_failure(tagged(dissipativity_probe_with(spec, few, seed, 4.0 * m, b)?, tag.clone())));

    let villani = villani_probe(spec, cfg.s, &dc.villani_radii, dc.villani_directions, seed)?;
    let monotone = villani.series.iter().all(|g| g.windows(2).all(|w| w[1] > w[0]));
    let mut trend = ProbeReport::new(
        "villani_monotone",
        villani.samples,
        if monotone { 0.0 } else { 1.0 },
        0.0,
        if monotone { 0.0 } else { -1.0 },
    );
    trend.details.push(format!(
        "G strictly increasing over {:?} in all {} directions: {monotone}",
        dc.villani_radii, dc.villani_directions
    ));
    probes.push(tagged(villani, tag.clone()));
    probes.push(tagged(trend, tag.clone()));
    probes.push(villani_closed_form_probe(dc.villani_width, 1, spec.lambda(), cfg.s, &dc.villani_radii, seed)?);

    if dc.moment_chains > 0 && dc.moment_steps > 0 {
        probes.push(moment_probe(cfg)?);
    }

    let constants = TheoryConstants::compute(spec, spec.n(), cfg.s)?;
    let pass = probes.iter().all(|p| p.pass);
    Ok(DiagnoseReport { constants, probes, pass })
}

/// Zero-initialized chains on a small sine dataset at the width and drift
/// given in the diagnose settings.
pub fn moment_probe(cfg: &ExperimentConfig) -> Result<ProbeReport> {
    let dc = &cfg.diagnose;
    let small = ExperimentConfig { n_train: dc.moment_n_train, ..cfg.clone() };
    let setting = Setting::new(&small, dc.moment_width, 0.0, cfg.seed)?;
    let spec = &setting.spec;
    let s = dc.moment_s;
    let lmc = LmcConfig {
        record_stride: dc.moment_record_stride,
        ..LmcConfig::new(dc.moment_drift * s / 2.0, s, dc.moment_steps, cfg.seed)
    };
    let chains = run_ensemble(spec, &lmc, dc.moment_chains, None)?;
    let constants = TheoryConstants::compute(spec, spec.n(), s)?;
    let init = [WeightMatrix::zeros(spec.width(), spec.input_dim())];
    let report = second_moment_probe(&chains, &constants, spec.param_count(), s, &init)?;
    Ok(tagged(report, format!("p={} n={} chains={} steps={}", dc.moment_width, spec.n(), dc.moment_chains, dc.moment_steps)))
}
