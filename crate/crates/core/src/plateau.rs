//! Plateau detection on a sampled trajectory.
//!
//! A plateau is the longest contiguous run whose values stay within a
//! relative band around a reference level. The reference starts as the
//! median of the positive samples and is then replaced by the median of the
//! first run found, after which the search is repeated once.

use serde::{Deserialize, Serialize};

/// Relative band used throughout the crate.
pub const DEFAULT_BAND: f64 = 0.05;

/// Minimum number of samples for a run to count as a plateau.
pub const MIN_LEN: usize = 3;

/// Band for the variance inside a mean plateau. Sample variances from a
/// thousand trials scatter by about 5% per point.
pub const VARIANCE_BAND: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    /// First index of the run.
    pub start: usize,
    /// One past the last index.
    pub end: usize,
    pub median: f64,
    pub mean: f64,
}

impl Plateau {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }

    /// Mean of another series over this window.
    pub fn mean_of(&self, series: &[f64]) -> f64 {
        let w = &series[self.range()];
        w.iter().sum::<f64>() / w.len() as f64
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn longest_run(values: &[f64], level: f64, band: f64) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for i in 0..=values.len() {
        let inside = i < values.len() && (values[i] - level).abs() <= band * level;
        match (inside, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.is_none_or(|(a, b)| i - s > b - a) {
                    best = Some((s, i));
                }
                start = None;
            }
            _ => {}
        }
    }
    best
}

/// Shrinks plateau `p` of `values` to the longest run inside it where
/// `spread` also stays within `band` of its median. Keeps `p` when no such
/// run exists.
pub fn narrow(p: &Plateau, values: &[f64], spread: &[f64], band: f64) -> Plateau {
    let Some(inner) = detect(&spread[p.range()], band) else {
        return p.clone();
    };
    let (start, end) = (p.start + inner.start, p.start + inner.end);
    let w = &values[start..end];
    Plateau {
        start,
        end,
        median: median(w).unwrap_or(p.median),
        mean: w.iter().sum::<f64>() / w.len() as f64,
    }
}

/// Detects the plateau of `values` with relative band `band`.
pub fn detect(values: &[f64], band: f64) -> Option<Plateau> {
    let positive: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    let mut level = median(&positive)?;
    let mut run = longest_run(values, level, band)?;
    level = median(&values[run.0..run.1])?;
    if let Some(r) = longest_run(values, level, band) {
        run = r;
    }
    if run.1 - run.0 < MIN_LEN {
        return None;
    }
    let w = &values[run.0..run.1];
    Some(Plateau {
        start: run.0,
        end: run.1,
        median: median(w)?,
        mean: w.iter().sum::<f64>() / w.len() as f64,
    })
}
