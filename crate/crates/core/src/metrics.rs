//! Ground-truth matching metrics and summary statistics.

use crate::error::{Error, Result};
use crate::grid::LabelGrid;
use serde::Serialize;
use std::collections::BTreeMap;

/// Agreement between a recovered label grid and the ground truth.
///
/// `raw` counts exact matches; the shift-aligned variant discounts the
/// global-shift degeneracy by picking the constant offset that maximizes
/// agreement.
#[derive(Debug, Clone, Serialize)]
pub struct MatchReport {
    pub raw_match_pct: f64,
    pub shift_aligned_match_pct: f64,
    /// Offset achieving the shift-aligned percentage; smallest in absolute
    /// value on ties, negative first.
    pub best_shift: i32,
    pub pixel_count: usize,
    pub width: usize,
    pub height: usize,
    /// Pixels where `result != truth` (raw comparison), row-major.
    #[serde(skip)]
    pub mismatch_mask: Vec<bool>,
}

/// Compares labels pixel by pixel.
pub fn match_labels(result: &LabelGrid, truth: &LabelGrid) -> Result<MatchReport> {
    if result.width() != truth.width() || result.height() != truth.height() {
        return Err(Error::invalid(format!(
            "result grid {}x{} does not match truth {}x{}",
            result.width(),
            result.height(),
            truth.width(),
            truth.height()
        )));
    }
    let n = result.len();
    // Matching under shift c counts pixels with truth - result == c, so one
    // histogram of differences covers every shift at once.
    let mut diff_counts: BTreeMap<i32, usize> = BTreeMap::new();
    let mut mismatch_mask = Vec::with_capacity(n);
    for (&r, &t) in result.labels().iter().zip(truth.labels()) {
        *diff_counts.entry(t - r).or_insert(0) += 1;
        mismatch_mask.push(r != t);
    }
    let raw = diff_counts.get(&0).copied().unwrap_or(0);
    let (mut best_shift, mut best_count) = (0i32, raw);
    for (&c, &count) in &diff_counts {
        let better = count > best_count
            || (count == best_count
                && (c.abs() < best_shift.abs() || (c.abs() == best_shift.abs() && c < best_shift)));
        if better {
            best_shift = c;
            best_count = count;
        }
    }
    let pct = |count: usize| 100.0 * count as f64 / n as f64;
    Ok(MatchReport {
        raw_match_pct: pct(raw),
        shift_aligned_match_pct: pct(best_count),
        best_shift,
        pixel_count: n,
        width: result.width(),
        height: result.height(),
        mismatch_mask,
    })
}

/// Arithmetic mean and population (divide-by-N) standard deviation.
pub fn summarize(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::invalid("cannot summarize an empty list"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}
