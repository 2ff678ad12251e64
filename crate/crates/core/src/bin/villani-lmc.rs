use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use serde::Serialize;

use villani_lmc::experiment::{
    constants_report, emit_plots, gibbs_check, rows_csv, run_diagnostics, run_sweep, run_trajectories, Check, Curve,
    ExperimentConfig, ExperimentResults, Setting,
};
use villani_lmc::gibbs::Density;
use villani_lmc::{Error, Result};

#[derive(Parser)]
#[command(name = "villani-lmc", version, about = "Langevin Monte Carlo for regularized depth-2 networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration; defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel chains and grid cells.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the theory constants of every configured width as JSON.
    Constants,
    /// Train every configured width at the first learning rate.
    Train,
    /// Width sweep, noise sweep, optimizer comparison and below-threshold run.
    Sweep,
    /// Compare time-averaged chain laws with the quadrature Gibbs measure.
    GibbsCheck,
    /// Run all assumption probes and print the JSON report.
    Diagnose,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(k) = cli.threads {
        set_threads(k)?;
    }
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    cfg.validate()?;
    match cli.command {
        Command::Constants => constants(&cfg),
        Command::Train => train(&cfg),
        Command::Sweep => sweep(&cfg),
        Command::GibbsCheck => gibbs(&cfg),
        Command::Diagnose => diagnose(&cfg),
    }
}

#[cfg(feature = "parallel")]
fn set_threads(k: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_: usize) -> Result<()> {
    log::warn!("built without the parallel feature; --threads is ignored");
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn report_checks(checks: &[Check]) -> bool {
    for c in checks {
        eprintln!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.pass)
}

fn write(path: &Path, body: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, body)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn constants(cfg: &ExperimentConfig) -> Result<bool> {
    let report = constants_report(cfg)?;
    print_json(&report)?;
    Ok(report.checks.iter().all(|c| c.pass))
}

fn train(cfg: &ExperimentConfig) -> Result<bool> {
    let lr = cfg.lr_grid[0];
    fs::create_dir_all(&cfg.out_dir)?;
    let mut curves = Vec::new();
    let mut ok = true;
    for &p in &cfg.widths {
        let setting = Setting::new(cfg, p, cfg.noise_sigma, cfg.seed)?;
        let runs = run_trajectories(cfg, &setting, cfg.optimizer, lr, true);
        match runs {
            Ok(runs) => {
                for (j, t) in runs.iter().enumerate() {
                    write(&cfg.out_dir.join(format!("train_p{p}_chain{j}.csv")), t.to_csv_string())?;
                }
                curves.push(Curve::from_trajectories(format!("p={p}"), &runs));
            }
            Err(Error::Divergence { step }) => {
                eprintln!("FAIL width {p}: diverged at step {step}");
                ok = false;
            }
            Err(e) => return Err(e),
        }
    }
    if !curves.is_empty() {
        let results = ExperimentResults { name: "train".into(), curves, summary: Vec::new(), pairs: Vec::new() };
        emit_plots(&[results], &cfg.out_dir)?;
    }
    info!("trained {} widths at lr {lr}", cfg.widths.len());
    Ok(ok)
}

fn sweep(cfg: &ExperimentConfig) -> Result<bool> {
    let outcome = run_sweep(cfg)?;
    emit_plots(&outcome.results, &cfg.out_dir)?;
    write(&cfg.out_dir.join("sweep_checks.csv"), rows_csv(&outcome.checks)?)?;
    Ok(report_checks(&outcome.checks))
}

fn gibbs(cfg: &ExperimentConfig) -> Result<bool> {
    let (report, exact) = gibbs_check(&cfg.gibbs, cfg.seed)?;
    fs::create_dir_all(&cfg.out_dir)?;
    write(&cfg.out_dir.join("gibbs_check.csv"), rows_csv(&report.rows)?)?;
    let mut density = Vec::new();
    exact.write_csv(&mut density)?;
    write(&cfg.out_dir.join("gibbs_density.csv"), density)?;
    print_json(&report)?;
    let tv: Vec<String> = report.rows.iter().map(|r| format!("{:?}@{}={:.4}", r.snapshot, r.n_steps, r.tv)).collect();
    let check = |name: &str, pass: bool, detail: String| Check { name: name.into(), pass, detail };
    let checks = [
        check("TV non-increasing across checkpoints", report.tv_non_increasing, tv.join(" ")),
        check(
            "final TV below target",
            report.final_tv_below_target,
            format!("{:.4} vs {}", report.final_tv, cfg.gibbs.tv_target),
        ),
        check(
            "2 C_PI (e^R2 - 1) >= W2^2 within error bars",
            report.inequality_holds,
            format!("C_PI lower estimate {:.4}", report.c_pi_lower),
        ),
    ];
    Ok(report_checks(&checks))
}

fn diagnose(cfg: &ExperimentConfig) -> Result<bool> {
    let report = run_diagnostics(cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;
    write(&cfg.out_dir.join("diagnose.json"), serde_json::to_string_pretty(&report)?)?;
    print_json(&report)?;
    for p in report.probes.iter().filter(|p| !p.pass) {
        eprintln!("FAIL {}: {:?}", p.name, p.details);
    }
    Ok(report.pass)
}
