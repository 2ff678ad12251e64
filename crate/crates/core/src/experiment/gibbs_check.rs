use rand::Rng;
use serde::Serialize;

use super::config::GibbsCheckConfig;
use crate::diagnostics::poincare_estimate_1d;
use crate::gibbs::{
    quadrature_gibbs, renyi2, tv_distance, w2_distance_1d, Density, GridDensity, GridSpec, Histogram, SnapshotKind,
};
use crate::lmc::{run_chain_observed, LmcConfig};
use crate::nn::{ActivationSpec, DataBounds, Dataset, LossKind, ProblemSpec};
use crate::rng::{stream_rng, Purpose};
use crate::{par, Error, Result};

/// Distances between the pooled chain law after `n_steps` and the exact
/// Gibbs measure, with chain-bootstrap standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsCheckRow {
    pub snapshot: SnapshotKind,
    pub n_steps: usize,
    pub samples: u64,
    pub tv: f64,
    pub tv_se: f64,
    pub w2_sq: f64,
    pub w2_sq_se: f64,
    pub renyi2: f64,
    pub renyi2_se: f64,
    /// `2 C_PI (e^{R_2} - 1)` with the estimated (lower) `C_PI`.
    pub renyi_bound: f64,
    pub renyi_bound_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsCheckReport {
    pub rows: Vec<GibbsCheckRow>,
    /// Lower estimate of the Poincare constant of the exact measure.
    pub c_pi_lower: f64,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub bins: usize,
    pub tv_non_increasing: bool,
    pub final_tv: f64,
    pub final_tv_below_target: bool,
    pub inequality_holds: bool,
    pub pass: bool,
}

pub fn gibbs_check_problem(cfg: &GibbsCheckConfig) -> Result<ProblemSpec> {
    let data = Dataset::from_rows(&[(vec![cfg.x], cfg.y)])?;
    ProblemSpec::new(ActivationSpec::tanh(), LossKind::Mse, vec![cfg.outer], data, cfg.lambda, DataBounds::default())
}

/// Runs `cfg.chains` zero-initialized chains on the one-weight problem and
/// compares their time-averaged laws at each checkpoint with the quadrature
/// Gibbs measure. The iterate proxy pools `W_kh` for `k < N`; the
/// interpolated proxy pools one uniform-time draw per step, which samples
/// the averaged measure over `[0, Nh]` exactly.
pub fn gibbs_check(cfg: &GibbsCheckConfig, seed: u64) -> Result<(GibbsCheckReport, GridDensity)> {
    let mut checkpoints = cfg.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if checkpoints.is_empty() || checkpoints[0] == 0 || cfg.chains < 2 || cfg.bootstrap < 2 {
        return Err(Error::InvalidParameter("gibbs check needs positive checkpoints, >= 2 chains, >= 2 bootstrap draws".into()));
    }
    let spec = gibbs_check_problem(cfg)?;
    let exact = quadrature_gibbs(&spec, cfg.s, &GridSpec::with_bins(cfg.bins))?;
    let grid = exact.grid().clone();
    let last = *checkpoints.last().expect("non-empty");

    // per chain: [checkpoint][kind] histograms
    let per_chain = par::try_map_indexed(cfg.chains, |j| {
        let lmc = LmcConfig { chain: j as u64, interpolated_snapshots: true, ..LmcConfig::new(cfg.step_size, cfg.s, last, seed) };
        let mut iterate = Histogram::new(grid.clone());
        let mut interpolated = Histogram::new(grid.clone());
        let mut saved = Vec::with_capacity(checkpoints.len());
        let mut next = 0;
        run_chain_observed(&spec, &lmc, |view| {
            if let Some(w) = view.interpolated {
                interpolated.add(w.as_slice());
            }
            if next < checkpoints.len() && view.step == checkpoints[next] {
                saved.push([iterate.clone(), interpolated.clone()]);
                next += 1;
            }
            iterate.add(view.weights.as_slice());
            Ok(())
        })?;
        Ok::<_, Error>(saved)
    })?;

    let c_pi = poincare_estimate_1d(&exact, cfg.poincare_family)?;
    let mut rows = Vec::new();
    for (kind_idx, kind) in [SnapshotKind::Iterate, SnapshotKind::Interpolated].into_iter().enumerate() {
        for (c, &n_steps) in checkpoints.iter().enumerate() {
            let hists: Vec<&Histogram> = per_chain.iter().map(|chain| &chain[c][kind_idx]).collect();
            rows.push(checkpoint_row(&exact, &hists, kind, n_steps, c_pi, cfg.bootstrap, seed)?);
        }
    }

    let k = checkpoints.len();
    let tv_non_increasing = rows
        .chunks(k)
        .all(|kind| kind.windows(2).all(|w| w[1].tv <= w[0].tv + 2.0 * (w[0].tv_se.powi(2) + w[1].tv_se.powi(2)).sqrt()));
    let final_tv = rows.chunks(k).map(|kind| kind[k - 1].tv).fold(0.0, f64::max);
    let inequality_holds = rows.iter().all(|r| r.renyi_bound + 2.0 * r.renyi_bound_se >= r.w2_sq - 2.0 * r.w2_sq_se);
    let final_tv_below_target = final_tv < cfg.tv_target;
    let axis = grid.axes()[0];
    let report = GibbsCheckReport {
        rows,
        c_pi_lower: c_pi,
        grid_lo: axis.lo,
        grid_hi: axis.hi,
        bins: axis.bins,
        tv_non_increasing,
        final_tv,
        final_tv_below_target,
        inequality_holds,
        pass: tv_non_increasing && final_tv_below_target && inequality_holds,
    };
    Ok((report, exact))
}

struct Stats {
    tv: f64,
    w2_sq: f64,
    renyi2: f64,
    bound: f64,
}

fn stats(exact: &GridDensity, pooled: &Histogram, c_pi: f64) -> Result<Stats> {
    let emp = pooled.to_density()?;
    let renyi2 = renyi2(&emp, exact)?;
    Ok(Stats {
        tv: tv_distance(&emp, exact)?,
        w2_sq: w2_distance_1d(&emp, exact)?.powi(2),
        renyi2,
        bound: 2.0 * c_pi * renyi2.exp_m1(),
    })
}

fn pool<'a>(hists: impl Iterator<Item = &'a Histogram>, grid: &crate::gibbs::Grid) -> Result<Histogram> {
    let mut total = Histogram::new(grid.clone());
    for h in hists {
        total.merge(h)?;
    }
    Ok(total)
}

fn checkpoint_row(
    exact: &GridDensity,
    hists: &[&Histogram],
    kind: SnapshotKind,
    n_steps: usize,
    c_pi: f64,
    bootstrap: usize,
    seed: u64,
) -> Result<GibbsCheckRow> {
    let grid = exact.grid();
    let full = pool(hists.iter().copied(), grid)?;
    let point = stats(exact, &full, c_pi)?;
    let mut rng = stream_rng(seed, n_steps as u64 * 2 + kind as u64, Purpose::Probe);
    let mut draws = Vec::with_capacity(bootstrap);
    for _ in 0..bootstrap {
        let resampled = pool((0..hists.len()).map(|_| hists[rng.random_range(0..hists.len())]), grid)?;
        draws.push(stats(exact, &resampled, c_pi)?);
    }
    let se = |f: fn(&Stats) -> f64| {
        let xs: Vec<f64> = draws.iter().map(f).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
    };
    Ok(GibbsCheckRow {
        snapshot: kind,
        n_steps,
        samples: full.total(),
        tv: point.tv,
        tv_se: se(|s| s.tv),
        w2_sq: point.w2_sq,
        w2_sq_se: se(|s| s.w2_sq),
        renyi2: point.renyi2,
        renyi2_se: se(|s| s.renyi2),
        renyi_bound: point.bound,
        renyi_bound_se: se(|s| s.bound),
    })
}
