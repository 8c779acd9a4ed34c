//! Benjamini-Hochberg false discovery rate control.

use crate::error::{Error, Result};

/// Benjamini-Hochberg step-up procedure.
///
/// Sorts the p-values ascending, finds the largest rank `i` with
/// `p_(i) ≤ (i/m)·alpha`, and rejects every hypothesis with a p-value at or
/// below that threshold. Returns the indices of rejected hypotheses in their
/// original order.
pub fn bh_fdr(p_values: &[f64], alpha: f64) -> Result<Vec<usize>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidInput(format!("alpha must be in (0, 1], got {alpha}")));
    }
    for (i, &p) in p_values.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!("p-value {p} at index {i} outside [0, 1]")));
        }
    }
    let m = p_values.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut threshold: Option<f64> = None;
    for (rank, &idx) in order.iter().enumerate().rev() {
        let bound = (rank + 1) as f64 / m as f64 * alpha;
        if p_values[idx] <= bound {
            threshold = Some(p_values[idx]);
            break;
        }
    }
    Ok(match threshold {
        Some(t) => (0..m).filter(|&i| p_values[i] <= t).collect(),
        None => Vec::new(),
    })
}
