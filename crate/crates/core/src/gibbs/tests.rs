use std::f64::consts::PI;

use super::*;
use crate::lmc::{run_ensemble, LmcConfig, Trajectory};
use crate::nn::{ActivationSpec, DataBounds, Dataset, LossKind, ProblemSpec};
use crate::Error;

fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean).powi(2) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

fn normal_on(grid: &Grid, mean: f64, var: f64) -> GridDensity {
    GridDensity::from_fn(grid.clone(), |x| normal_pdf(x[0], mean, var)).unwrap()
}

#[test]
fn regularizer_gibbs_is_gaussian() {
    // exp(-2 (lambda/2) w^2 / s) with lambda = 2, s = 1 is N(0, 1/4).
    let spec = ProblemSpec::pure_regularizer(1, 1, 2.0).unwrap();
    let mu = quadrature_gibbs(&spec, 1.0, &GridSpec::with_bins(2000)).unwrap();
    let axis = mu.grid().axes()[0];
    let worst = mu
        .masses()
        .iter()
        .enumerate()
        .map(|(i, m)| (m / axis.width() - normal_pdf(axis.center(i), 0.0, 0.25)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "max density error {worst}");
    assert!(mu.boundary_mass() < TAIL_TOLERANCE);
    assert!(mu.mean_1d().abs() < 1e-12);
}

#[test]
fn two_dimensional_regularizer_is_symmetric() {
    let spec = ProblemSpec::pure_regularizer(2, 1, 1.0).unwrap();
    let mu = quadrature_gibbs(&spec, 0.5, &GridSpec::with_bins(41)).unwrap();
    let n = 41;
    for i in 0..n {
        for j in 0..n {
            let (a, b, c) = (mu.masses()[i * n + j], mu.masses()[j * n + i], mu.masses()[(n - 1 - i) * n + j]);
            assert!((a - b).abs() < 1e-15 && (a - c).abs() < 1e-15);
        }
    }
}

#[test]
fn mirrored_data_gives_symmetric_density() {
    let data = Dataset::from_rows(&[(vec![0.5], 1.5), (vec![0.5], -1.5)]).unwrap();
    let spec = ProblemSpec::new(ActivationSpec::tanh(), LossKind::Mse, vec![2.0], data, 0.5, DataBounds::default()).unwrap();
    let mu = quadrature_gibbs(&spec, 0.3, &GridSpec::with_bins(301)).unwrap();
    let m = mu.masses();
    for i in 0..m.len() {
        assert!((m[i] - m[m.len() - 1 - i]).abs() < 1e-14);
    }
}

#[test]
fn refinement_changes_little() {
    let data = Dataset::from_rows(&[(vec![0.5], 2.0)]).unwrap();
    let spec = ProblemSpec::new(ActivationSpec::tanh(), LossKind::Mse, vec![2.0], data, 2.1, DataBounds::default()).unwrap();
    let coarse = quadrature_gibbs(&spec, 1.0, &GridSpec::with_bins(400)).unwrap();
    let fine = quadrature_gibbs(&spec, 1.0, &GridSpec::with_bins(800)).unwrap();
    assert_eq!(coarse.grid().axes()[0].lo, fine.grid().axes()[0].lo);
    let pooled: Vec<f64> = fine.masses().chunks(2).map(|c| c[0] + c[1]).collect();
    let pooled = GridDensity::from_weights(coarse.grid().clone(), pooled).unwrap();
    let tv = tv_distance(&coarse, &pooled).unwrap();
    assert!(tv < 1e-4, "tv {tv}");
}

#[test]
fn higher_dimensions_are_refused() {
    let spec = ProblemSpec::pure_regularizer(3, 1, 1.0).unwrap();
    assert!(matches!(quadrature_gibbs(&spec, 1.0, &GridSpec::with_bins(10)), Err(Error::UnsupportedDimension(3))));
}

#[test]
fn tv_between_shifted_normals() {
    // 2 Phi(1/2) - 1 = erf(1 / (2 sqrt 2))
    let grid = Grid::uniform_1d(-10.0, 11.0, 8000).unwrap();
    let tv = tv_distance(&normal_on(&grid, 0.0, 1.0), &normal_on(&grid, 1.0, 1.0)).unwrap();
    assert!((tv - 0.382925).abs() < 1e-5, "tv {tv}");
    let same = tv_distance(&normal_on(&grid, 0.0, 1.0), &normal_on(&grid, 0.0, 1.0)).unwrap();
    assert_eq!(same, 0.0);
}

#[test]
fn w2_between_shifted_normals() {
    let grid = Grid::uniform_1d(-10.0, 12.0, 4000).unwrap();
    for mu in [0.25, 1.0, 2.0] {
        let w2 = w2_distance_1d(&normal_on(&grid, 0.0, 1.0), &normal_on(&grid, mu, 1.0)).unwrap();
        assert!((w2 - mu).abs() < 1e-3, "mu {mu}: {w2}");
    }
}

#[test]
fn w2_between_point_masses() {
    let grid = Grid::uniform_1d(-0.5, 1.5, 2).unwrap();
    let p = GridDensity::from_weights(grid.clone(), vec![1.0, 0.0]).unwrap();
    let q = GridDensity::from_weights(grid, vec![0.0, 1.0]).unwrap();
    assert!((w2_distance_1d(&p, &q).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(w2_distance_1d(&p, &p).unwrap(), 0.0);
}

#[test]
fn renyi_examples() {
    let grid = Grid::uniform_1d(0.0, 2.0, 2).unwrap();
    let point = GridDensity::from_weights(grid.clone(), vec![1.0, 0.0]).unwrap();
    let flat = GridDensity::from_weights(grid, vec![1.0, 1.0]).unwrap();
    assert!((renyi2(&point, &flat).unwrap() - 2f64.ln()).abs() < 1e-15);
    assert_eq!(renyi2(&flat, &point).unwrap(), f64::INFINITY);
    assert_eq!(renyi2(&flat, &flat).unwrap(), 0.0);
}

#[test]
fn mismatched_grids_are_errors() {
    let p = normal_on(&Grid::uniform_1d(-5.0, 5.0, 100).unwrap(), 0.0, 1.0);
    let q = normal_on(&Grid::uniform_1d(-5.0, 5.0, 101).unwrap(), 0.0, 1.0);
    assert!(matches!(tv_distance(&p, &q), Err(Error::GridMismatch)));
    assert!(matches!(w2_distance_1d(&p, &q), Err(Error::GridMismatch)));
    assert!(matches!(renyi2(&p, &q), Err(Error::GridMismatch)));
}

#[test]
fn averaged_measure_pools_post_burn_in_snapshots() {
    let spec = ProblemSpec::pure_regularizer(1, 1, 1.0).unwrap();
    let cfg = LmcConfig { keep_snapshots: true, interpolated_snapshots: true, ..LmcConfig::new(0.01, 1.0, 100, 4) };
    let chains = run_ensemble(&spec, &cfg, 3, None).unwrap();
    let grid = Grid::uniform_1d(-4.0, 4.0, 16).unwrap();
    let iterates = averaged_measure(&chains, 10, &grid, SnapshotKind::Iterate).unwrap();
    assert_eq!(iterates.samples(), 3 * 91);
    let interpolated = averaged_measure(&chains, 10, &grid, SnapshotKind::Interpolated).unwrap();
    assert_eq!(interpolated.samples(), 3 * 91);
    assert!((iterates.masses().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(matches!(averaged_measure(&chains, 101, &grid, SnapshotKind::Iterate), Err(Error::NoSnapshots)));
}

#[test]
fn averaged_measure_trivial_cases() {
    let spec = ProblemSpec::pure_regularizer(1, 1, 1.0).unwrap();
    let cfg = LmcConfig { keep_snapshots: true, ..LmcConfig::new(0.01, 1.0, 0, 1) };
    let single = run_ensemble(&spec, &cfg, 1, None).unwrap();
    let grid = Grid::uniform_1d(-1.0, 1.0, 4).unwrap();
    let point = averaged_measure(&single, 0, &grid, SnapshotKind::Iterate).unwrap();
    assert_eq!(point.masses(), &[0.0, 0.0, 1.0, 0.0]);

    let cfg = LmcConfig { keep_snapshots: true, ..LmcConfig::new(0.01, 1.0, 50, 1) };
    let once = run_ensemble(&spec, &cfg, 2, None).unwrap();
    let twice: Vec<_> = once.iter().chain(&once).cloned().collect();
    let a = averaged_measure(&once, 5, &grid, SnapshotKind::Iterate).unwrap();
    let b = averaged_measure(&twice, 5, &grid, SnapshotKind::Iterate).unwrap();
    assert_eq!(a.masses(), b.masses());
}

#[test]
fn averaged_measure_approaches_gaussian_gibbs() {
    // Zero init is a point mass; the pooled chain law should be much closer to N(0, 1/4).
    let spec = ProblemSpec::pure_regularizer(1, 1, 2.0).unwrap();
    let mu = quadrature_gibbs(&spec, 1.0, &GridSpec::with_bins(60)).unwrap();
    let cfg = LmcConfig { keep_snapshots: true, ..LmcConfig::new(0.01, 1.0, 2000, 9) };
    let chains = run_ensemble(&spec, &cfg, 8, None).unwrap();
    let initial: Vec<_> = chains.iter().map(|t| Trajectory { records: t.records[..1].to_vec(), ..t.clone() }).collect();
    let tv0 = tv_distance(&averaged_measure(&initial, 0, mu.grid(), SnapshotKind::Iterate).unwrap(), &mu).unwrap();
    let tv = tv_distance(&averaged_measure(&chains, 100, mu.grid(), SnapshotKind::Iterate).unwrap(), &mu).unwrap();
    assert!(tv < tv0 && tv < 0.1, "{tv} vs {tv0}");
}
