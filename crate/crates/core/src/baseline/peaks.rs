use serde::{Deserialize, Serialize};

use super::series::SelectivitySeries;
use super::BaselineError;

/// A candidate window `[start_cell, start_cell + cells)` with its summed score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakWindow {
    pub start_cell: usize,
    pub cells: usize,
    pub sum: f64,
    pub start_s: f64,
    pub end_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakSelection {
    /// Descending by sum, ties in earlier-start order.
    pub windows: Vec<PeakWindow>,
    /// The episode was shorter than one window; the single window covers it all.
    pub episode_too_short: bool,
}

pub fn window_cells(window_s: f64, resolution_s: f64) -> usize {
    ((window_s / resolution_s).round() as usize).max(1)
}

/// Greedy top-`k` non-overlapping windows by summed score; each pick takes
/// the highest remaining sum, earliest start on ties.
pub fn select_peaks(series: &SelectivitySeries, window_s: f64, k: usize) -> Result<PeakSelection, BaselineError> {
    if !(window_s > 0.0) {
        return Err(BaselineError::InvalidConfig(format!("window must be positive, got {window_s}")));
    }
    let res = series.resolution_s;
    let n = series.len();
    let w = window_cells(window_s, res);
    if n < w {
        let sum = series.values.iter().sum();
        let whole = PeakWindow { start_cell: 0, cells: n, sum, start_s: 0.0, end_s: n as f64 * res };
        return Ok(PeakSelection { windows: vec![whole], episode_too_short: true });
    }

    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0f64);
    for v in &series.values {
        prefix.push(prefix.last().unwrap() + v);
    }
    let sums: Vec<f64> = (0..=n - w).map(|s| prefix[s + w] - prefix[s]).collect();

    // blocked[s] marks starts whose window would overlap a chosen one
    let mut blocked = vec![false; sums.len()];
    let mut windows = Vec::with_capacity(k);
    for _ in 0..k {
        let Some((start, &sum)) = sums.iter().enumerate().filter(|(s, _)| !blocked[*s]).fold(
            None::<(usize, &f64)>,
            |best, (s, v)| match best {
                Some((_, bv)) if *bv >= *v => best,
                _ => Some((s, v)),
            },
        ) else {
            break;
        };
        let lo = start.saturating_sub(w - 1);
        let hi = (start + w).min(blocked.len());
        blocked[lo..hi].iter_mut().for_each(|b| *b = true);
        windows.push(PeakWindow {
            start_cell: start,
            cells: w,
            sum,
            start_s: start as f64 * res,
            end_s: (start + w) as f64 * res,
        });
    }
    Ok(PeakSelection { windows, episode_too_short: false })
}
