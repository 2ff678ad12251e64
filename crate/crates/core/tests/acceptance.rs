//! Acceptance criteria 1-10. Runs as a plain binary so every criterion
//! prints one PASS/FAIL line; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use villani_lmc::diagnostics::{dissipativity_probe, grad_check, lipschitz_probe, villani_probe, GradCheckOptions};
use villani_lmc::experiment::{
    check_noise_sweep, check_width_sweep, constants_report, gibbs_check, moment_probe, noise_sweep, villani_closed_form_probe,
    width_sweep, ExperimentConfig, Setting, Task,
};
use villani_lmc::lmc::{run_chain_observed, LmcConfig};
use villani_lmc::nn::ProblemSpec;
use villani_lmc::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed(limit: Duration, f: impl FnOnce() -> Result<Outcome>) -> Outcome {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    match out {
        Ok(o) => Outcome {
            pass: o.pass && elapsed < limit,
            detail: format!("{}; runtime {:.2?} (limit {:?})", o.detail, elapsed, limit),
        },
        Err(e) => Outcome { pass: false, detail: format!("error: {e}") },
    }
}

fn sec(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn both_tasks(cfg: &ExperimentConfig) -> [ExperimentConfig; 2] {
    [Task::Regression, Task::Classification].map(|task| ExperimentConfig { task, ..cfg.clone() })
}

fn constants() -> Result<Outcome> {
    let report = constants_report(&ExperimentConfig::default())?;
    let lc: Vec<f64> = report.entries.iter().map(|e| e.constants.lambda_c).collect();
    let pass = !lc.is_empty() && lc.iter().all(|v| *v == 2.0) && report.checks.iter().all(|c| c.pass);
    Ok(Outcome { pass, detail: format!("lambda_c^MSE by width = {lc:?}") })
}

fn gradients() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut configs = 0;
    for cfg in both_tasks(&ExperimentConfig::default()) {
        for p in [1, 4, 16] {
            let setting = Setting::new(&cfg, p, 0.0, 0)?;
            let r = grad_check(&setting.spec, &GradCheckOptions { trials: 100, ..Default::default() })?;
            worst = worst.max(r.observed);
            configs += r.samples;
        }
    }
    Ok(Outcome { pass: worst < 1e-5, detail: format!("max relative error {worst:.3e} over {configs} random weights") })
}

fn probe_all(what: &str, f: impl Fn(&ProblemSpec) -> Result<villani_lmc::diagnostics::ProbeReport>) -> Result<Outcome> {
    let mut pass = true;
    let mut lines = Vec::new();
    for cfg in both_tasks(&ExperimentConfig::default()) {
        for &p in &cfg.diagnose.probe_widths {
            let setting = Setting::new(&cfg, p, 0.0, 0)?;
            let r = f(&setting.spec)?;
            pass &= r.pass;
            lines.push(format!("{:?} p={p}: {what} {:.4e} (bound {:.4e})", cfg.task, r.observed, r.bound));
        }
    }
    Ok(Outcome { pass, detail: lines.join(", ") })
}

fn smoothness() -> Result<Outcome> {
    probe_all("max ratio", |spec| lipschitz_probe(spec, 10_000, 0))
}

fn dissipation() -> Result<Outcome> {
    probe_all("min margin", |spec| dissipativity_probe(spec, 10_000, 0))
}

/// Per-entry stationary variance of LMC on `(lambda/2) w^2` against the
/// discrete OU fixed point `2h / (1 - (1 - 2 h lambda / s)^2)`.
fn ornstein_uhlenbeck() -> Result<Outcome> {
    let (lambda, s, h) = (2.0, 1.0, 0.01);
    let rho = 1.0 - 2.0 * h * lambda / s;
    let oracle = 2.0 * h / (1.0 - rho * rho);
    let spec = ProblemSpec::pure_regularizer(1, 1, lambda)?;
    let (chains, burn_in, kept) = (100u64, 2_000usize, 10_000usize);
    let mut estimates = Vec::new();
    for chain in 0..chains {
        let cfg = LmcConfig { chain, ..LmcConfig::new(h, s, burn_in + kept, 7) };
        let mut sum_sq = 0.0;
        run_chain_observed(&spec, &cfg, |v| {
            if v.step > burn_in {
                sum_sq += v.weights.as_slice()[0].powi(2);
            }
            Ok(())
        })?;
        estimates.push(sum_sq / kept as f64);
    }
    let k = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / k;
    let se = (estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt();
    let z = (mean - oracle) / se;
    Ok(Outcome {
        pass: z.abs() < 3.0,
        detail: format!("variance {mean:.6} vs {oracle:.6} (se {se:.2e}, z {z:.2}) over {} samples", chains as usize * kept),
    })
}

fn gibbs() -> Result<Outcome> {
    let cfg = ExperimentConfig::default();
    let (report, _) = gibbs_check(&cfg.gibbs, cfg.seed)?;
    let tv: Vec<String> = report.rows.iter().map(|r| format!("{:?}@{}={:.4}", r.snapshot, r.n_steps, r.tv)).collect();
    Ok(Outcome {
        pass: report.tv_non_increasing && report.final_tv_below_target && report.inequality_holds,
        detail: format!(
            "TV {}; non-increasing {}, final {:.4} < 0.05 {}, inequality {} (C_PI >= {:.4})",
            tv.join(" "),
            report.tv_non_increasing,
            report.final_tv,
            report.final_tv_below_target,
            report.inequality_holds,
            report.c_pi_lower
        ),
    })
}

fn phenomenon() -> Result<Outcome> {
    let cfg = ExperimentConfig::default();
    let widths = check_width_sweep(&width_sweep(&cfg)?);
    let noise = check_noise_sweep(&noise_sweep(&cfg)?);
    Ok(Outcome { pass: widths.pass && noise.pass, detail: format!("{}; {}", widths.detail, noise.detail) })
}

fn villani() -> Result<Outcome> {
    let cfg = ExperimentConfig::default();
    let radii = [1.0, 10.0, 100.0, 1000.0];
    let mut monotone = true;
    let mut directions = 0;
    for &p in &cfg.widths {
        let setting = Setting::new(&cfg, p, 0.0, 0)?;
        let r = villani_probe(&setting.spec, cfg.s, &radii, 16, 0)?;
        monotone &= r.series.iter().all(|g| g.windows(2).all(|w| w[1] > w[0]));
        directions += r.series.len();
    }
    let closed = villani_closed_form_probe(16, 1, 2.1, cfg.s, &radii, 0)?;
    Ok(Outcome {
        pass: monotone && closed.pass,
        detail: format!(
            "G increasing in all {directions} directions: {monotone}; closed-form rel. error {:.2e}",
            closed.observed
        ),
    })
}

fn second_moment() -> Result<Outcome> {
    // moment_probe starts every chain at W = 0.
    let r = moment_probe(&ExperimentConfig::default())?;
    Ok(Outcome {
        pass: r.pass,
        detail: format!("{}: max E||W||^2 {:.4e} vs bound {:.4}, {} warnings", r.name, r.observed, r.bound, r.warnings.len()),
    })
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn determinism() -> Result<Outcome> {
    let tmp = tempfile::tempdir()?;
    let config = tmp.path().join("small.json");
    std::fs::write(
        &config,
        r#"{"widths":[4,8],"n_steps":300,"chains":4,"n_train":30,"n_test":30,"lr_grid":[1e-3,5e-3],
            "noise_seeds":2,"record_stride":20,"gibbs":{"checkpoints":[1000,4000],"chains":8,"bootstrap":50}}"#,
    )?;
    let mut files = 0;
    let mut mismatched = Vec::new();
    for command in ["train", "sweep", "gibbs-check"] {
        let mut outputs = Vec::new();
        for threads in ["1", "8"] {
            let out = tmp.path().join(format!("{command}-{threads}"));
            let status = Command::new(env!("CARGO_BIN_EXE_villani-lmc"))
                .args([
                    "--config",
                    config.to_str().unwrap(),
                    "--seed",
                    "3",
                    "--threads",
                    threads,
                    "--out",
                    out.to_str().unwrap(),
                    command,
                ])
                .env("RUST_LOG", "off")
                .output()?;
            if status.status.code().is_none_or(|c| c > 1) {
                return Ok(Outcome {
                    pass: false,
                    detail: format!("{command} failed: {}", String::from_utf8_lossy(&status.stderr)),
                });
            }
            outputs.push(csv_files(&out));
        }
        files += outputs[0].len();
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            mismatched.push(command);
        }
    }
    Ok(Outcome { pass: mismatched.is_empty(), detail: format!("{files} CSV files compared; mismatched commands {mismatched:?}") })
}

type Criterion = (&'static str, Duration, fn() -> Result<Outcome>);

fn main() {
    let criteria: [Criterion; 10] = [
        ("constant reproduction", sec(1), constants),
        ("gradient correctness", sec(10), gradients),
        ("smoothness bound", sec(60), smoothness),
        ("dissipativity", sec(60), dissipation),
        ("discrete OU exactness", sec(60), ornstein_uhlenbeck),
        ("Gibbs convergence", sec(300), gibbs),
        ("width and noise phenomenon", sec(900), phenomenon),
        ("Villani trend", sec(60), villani),
        ("second-moment bound", sec(300), second_moment),
        ("determinism across threads", sec(600), determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let o = timed(limit, run);
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
