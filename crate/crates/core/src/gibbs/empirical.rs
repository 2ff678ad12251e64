use serde::{Deserialize, Serialize};

use super::grid::{EmpiricalDensity, Grid, Histogram};
use crate::lmc::Trajectory;
use crate::{Error, Result};

/// Which stored iterate to pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotKind {
    /// `W_kh` at the grid times.
    Iterate,
    /// `W_t` at a uniform time inside each step.
    Interpolated,
}

/// Histogram of all post-burn-in snapshots pooled across chains: the
/// Riemann proxy for the time-averaged law over `[0, Nh]`.
pub fn averaged_measure(
    trajectories: &[Trajectory],
    burn_in: usize,
    grid: &Grid,
    kind: SnapshotKind,
) -> Result<EmpiricalDensity> {
    let mut hist = Histogram::new(grid.clone());
    for record in trajectories.iter().flat_map(|t| &t.records).filter(|r| r.step >= burn_in) {
        let snapshot = match kind {
            SnapshotKind::Iterate => record.snapshot.as_deref(),
            SnapshotKind::Interpolated => record.interpolated.as_deref(),
        };
        if let Some(w) = snapshot {
            if w.len() != grid.dim() {
                return Err(Error::DimensionMismatch { expected: grid.dim(), got: w.len() });
            }
            hist.add(w);
        }
    }
    hist.to_density()
}
