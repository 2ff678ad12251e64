use rand::Rng;

use super::{random_direction, ProbeReport};
use crate::nn::{ProblemSpec, WeightMatrix};
use crate::rng::{stream_rng, Purpose};
use crate::{par, Error, Result};

/// Default radii of the growth probe.
pub const VILLANI_RADII: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

/// Above this many parameters the Laplacian is estimated stochastically.
const EXACT_LAPLACIAN_MAX: usize = 64;
const HUTCHINSON_PROBES: usize = 64;
const FD_STEP: f64 = 1e-4;

/// Laplacian of the empirical loss from central differences of the
/// gradient: an exact coordinate sweep for small weight spaces, a Hutchinson
/// estimate with Rademacher probes drawn from `rng` otherwise.
pub fn laplacian<R: Rng + ?Sized>(spec: &ProblemSpec, w: &WeightMatrix, rng: &mut R) -> Result<f64> {
    let n = w.len();
    let directional = |u: &[f64]| -> Result<f64> {
        let shift = |sign: f64| {
            WeightMatrix::from_vec(w.rows(), w.cols(), w.as_slice().iter().zip(u).map(|(a, b)| a + sign * FD_STEP * b).collect())
        };
        let fwd = spec.gradient(&shift(1.0)?)?;
        let back = spec.gradient(&shift(-1.0)?)?;
        Ok(fwd.sub(&back).as_slice().iter().zip(u).map(|(g, ui)| g * ui).sum::<f64>() / (2.0 * FD_STEP))
    };
    if n <= EXACT_LAPLACIAN_MAX {
        let mut e = vec![0.0; n];
        let mut total = 0.0;
        for j in 0..n {
            e[j] = 1.0;
            total += directional(&e)?;
            e[j] = 0.0;
        }
        Ok(total)
    } else {
        let mut total = 0.0;
        for _ in 0..HUTCHINSON_PROBES {
            let z: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
            total += directional(&z)?;
        }
        Ok(total / HUTCHINSON_PROBES as f64)
    }
}

/// `G(W) = -Lap L(W) + ||grad L(W)||^2 / s`
pub fn villani_g<R: Rng + ?Sized>(spec: &ProblemSpec, s: f64, w: &WeightMatrix, rng: &mut R) -> Result<f64> {
    Ok(-laplacian(spec, w, rng)? + spec.gradient(w)?.frob_sq() / s)
}

/// Evaluates `G(R u)` for every radius and random unit direction `u`.
///
/// Passes when in every direction `G` at the two largest radii is positive
/// and above `G` at the smallest radius. Rows of `values()` are directions;
/// the details also say whether every row was strictly increasing.
pub fn villani_probe(spec: &ProblemSpec, s: f64, radii: &[f64], directions: usize, seed: u64) -> Result<ProbeReport> {
    if !(s > 0.0) || radii.len() < 3 || directions == 0 || radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("villani_probe needs s > 0, directions >= 1 and >= 3 increasing radii".into()));
    }
    let (p, d) = (spec.width(), spec.input_dim());
    let rows = par::try_map_indexed(directions, |t| {
        let mut rng = stream_rng(seed, t as u64, Purpose::Probe);
        let u = random_direction(&mut rng, p * d);
        radii
            .iter()
            .map(|r| villani_g(spec, s, &WeightMatrix::from_vec(p, d, u.iter().map(|x| r * x).collect())?, &mut rng))
            .collect::<Result<Vec<f64>>>()
    })?;
    let k = radii.len();
    let mut worst = f64::INFINITY;
    let mut monotone = true;
    for g in &rows {
        let small = g[0];
        for &big in &g[k - 2..] {
            worst = worst.min(big - small).min(big);
        }
        monotone &= g.windows(2).all(|w| w[1] > w[0]);
    }
    let mut report = ProbeReport::new("villani", (directions * k) as u64, worst, 0.0, worst);
    report.details.push(format!("strictly increasing over radii {radii:?} in every direction: {monotone}"));
    for (t, g) in rows.iter().enumerate() {
        report.details.push(format!("direction {t}: G = {g:?}"));
    }
    report.series = rows;
    Ok(report)
}
