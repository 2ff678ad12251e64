use rand::Rng;

use super::{random_direction, random_point, ProbeReport, SLACK};
use crate::nn::{ProblemSpec, WeightMatrix};
use crate::rng::{stream_rng, Purpose};
use crate::theory::beta_bound;
use crate::{par, Error, Result};

/// Separation of near pairs.
pub const NEAR_GAP: f64 = 1e-3;
/// Largest norm of far-pair points.
pub const FAR_RADIUS: f64 = 50.0;

/// Largest `||grad L_i(W) - grad L_i(V)|| / ||W - V||` over random pairs and
/// random examples `i`, checked against [`beta_bound`].
pub fn lipschitz_probe(spec: &ProblemSpec, pairs: usize, seed: u64) -> Result<ProbeReport> {
    lipschitz_probe_with_bound(spec, pairs, seed, beta_bound(spec))
}

/// Same probe against an arbitrary bound (used to check the probe can fail).
pub fn lipschitz_probe_with_bound(spec: &ProblemSpec, pairs: usize, seed: u64, bound: f64) -> Result<ProbeReport> {
    if pairs == 0 {
        return Err(Error::InvalidParameter("lipschitz_probe needs at least one pair".into()));
    }
    let ratios = par::try_map_indexed(pairs, |t| pair_ratio(spec, seed, t))?;
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let mut report = ProbeReport::new("lipschitz", pairs as u64, worst, bound, bound + SLACK - worst);
    report.details.push(format!("max gradient-difference ratio {worst:.6e} against beta {bound:.6e}"));
    Ok(report)
}

fn pair_ratio(spec: &ProblemSpec, seed: u64, t: usize) -> Result<f64> {
    let (p, d) = (spec.width(), spec.input_dim());
    let mut rng = stream_rng(seed, t as u64, Purpose::Probe);
    let i = rng.random_range(0..spec.n());
    let w = random_point(&mut rng, p, d, FAR_RADIUS);
    let v = if t.is_multiple_of(2) {
        let u = random_direction(&mut rng, p * d);
        WeightMatrix::from_vec(p, d, w.as_slice().iter().zip(&u).map(|(a, b)| a + NEAR_GAP * b).collect())?
    } else {
        random_point(&mut rng, p, d, FAR_RADIUS)
    };
    let gap = v.sub(&w).frob();
    if gap == 0.0 {
        return Ok(0.0);
    }
    Ok(spec.example_gradient(i, &v)?.sub(&spec.example_gradient(i, &w)?).frob() / gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{ActivationSpec, DataBounds, Dataset, LossKind};

    #[test]
    fn regularizer_ratio_is_lambda() {
        let spec = ProblemSpec::pure_regularizer(4, 1, 1.5).unwrap();
        let r = lipschitz_probe(&spec, 200, 1).unwrap();
        assert!(r.pass);
        assert!((r.observed - 1.5).abs() < 1e-9, "{}", r.observed);
        assert_eq!(r.bound, 2.0 * 1.5);
    }

    #[test]
    fn tiny_bound_fails() {
        let data = Dataset::from_rows(&[(vec![0.5], 1.0), (vec![-0.3], -2.0)]).unwrap();
        let spec = ProblemSpec::new(ActivationSpec::sigmoid(), LossKind::Mse, vec![1.0, -1.0], data, 0.3, DataBounds::default())
            .unwrap();
        let r = lipschitz_probe_with_bound(&spec, 100, 2, beta_bound(&spec) / 1000.0).unwrap();
        assert!(!r.pass && r.worst_margin < 0.0);
        assert!(lipschitz_probe(&spec, 100, 2).unwrap().pass);
    }
}
