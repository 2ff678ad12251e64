use super::{random_point, ProbeReport, SLACK};
use crate::nn::ProblemSpec;
use crate::rng::{stream_rng, Purpose};
use crate::theory::dissipativity;
use crate::{par, Error, Result};

/// Checks `<W, grad L_i(W)> >= m ||W||^2 - b` for every example at random
/// `W` with norms up to `100 sqrt(b/m)`, using the theory's `(m, b)`.
pub fn dissipativity_probe(spec: &ProblemSpec, samples: usize, seed: u64) -> Result<ProbeReport> {
    let (m, b) = dissipativity(spec)?;
    dissipativity_probe_with(spec, samples, seed, m, b)
}

/// Same probe with caller-supplied constants.
pub fn dissipativity_probe_with(spec: &ProblemSpec, samples: usize, seed: u64, m: f64, b: f64) -> Result<ProbeReport> {
    if samples == 0 || !(m > 0.0) || b < 0.0 {
        return Err(Error::InvalidParameter("dissipativity probe needs samples >= 1, m > 0, b >= 0".into()));
    }
    let r_max = if b > 0.0 { 100.0 * (b / m).sqrt() } else { 100.0 };
    let (p, d) = (spec.width(), spec.input_dim());
    let per_sample = par::try_map_indexed(samples, |t| {
        let mut rng = stream_rng(seed, t as u64, Purpose::Probe);
        let w = random_point(&mut rng, p, d, r_max);
        let floor = m * w.frob_sq() - b;
        let mut worst = f64::INFINITY;
        let mut violations = 0u64;
        for i in 0..spec.n() {
            let margin = w.dot(&spec.example_gradient(i, &w)?) - floor;
            if margin + SLACK < 0.0 {
                violations += 1;
            }
            worst = worst.min(margin);
        }
        Ok::<_, Error>((worst, violations))
    })?;
    let worst = per_sample.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
    let violations: u64 = per_sample.iter().map(|x| x.1).sum();
    // observed: smallest <W, grad L_i(W)> - (m ||W||^2 - b); it must stay >= 0.
    let mut report = ProbeReport::new("dissipativity", (samples * spec.n()) as u64, worst, 0.0, worst + SLACK);
    report.details.push(format!("m = {m}, b = {b}, radii up to {r_max:.4e}"));
    report.details.push(format!("{violations} violations"));
    Ok(report)
}
