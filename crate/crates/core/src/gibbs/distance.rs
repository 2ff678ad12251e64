use super::grid::Density;
use crate::{Error, Result};

fn same_grid(p: &impl Density, q: &impl Density) -> Result<()> {
    if p.grid() != q.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `1/2 sum |p_i - q_i|`
pub fn tv_distance(p: &impl Density, q: &impl Density) -> Result<f64> {
    same_grid(p, q)?;
    let l1: f64 = p.masses().iter().zip(q.masses()).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

/// 2-Wasserstein distance between two 1D densities on the same grid, from
/// the monotone (quantile) coupling of cell-center atoms.
pub fn w2_distance_1d(p: &impl Density, q: &impl Density) -> Result<f64> {
    same_grid(p, q)?;
    let grid = p.grid();
    if grid.dim() != 1 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    let axis = grid.axes()[0];
    let (pm, qm) = (p.masses(), q.masses());
    let (mut i, mut j) = (0, 0);
    let (mut left_p, mut left_q) = (pm[0], qm[0]);
    let mut cost = 0.0;
    loop {
        let flow = left_p.min(left_q);
        let gap = axis.center(i) - axis.center(j);
        cost += flow * gap * gap;
        left_p -= flow;
        left_q -= flow;
        if left_p <= 0.0 {
            i += 1;
            if i == pm.len() {
                break;
            }
            left_p = pm[i];
        }
        if left_q <= 0.0 {
            j += 1;
            if j == qm.len() {
                break;
            }
            left_q = qm[j];
        }
    }
    Ok(cost.max(0.0).sqrt())
}

/// `R_2(p || q) = ln sum p_i^2 / q_i`. Returns `+inf` when `p` charges a cell
/// that `q` does not.
pub fn renyi2(p: &impl Density, q: &impl Density) -> Result<f64> {
    same_grid(p, q)?;
    let mut total = 0.0;
    for (a, b) in p.masses().iter().zip(q.masses()) {
        if *a > 0.0 {
            if *b <= 0.0 {
                return Ok(f64::INFINITY);
            }
            total += a * a / b;
        }
    }
    Ok(total.ln().max(0.0))
}
