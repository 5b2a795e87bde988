//! Deviation between two occupation series on their common window.

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::oracle::exact::ExactSeries;

/// Maximum and mean absolute deviation on the common window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub max_abs_deviation: f64,
    pub mean_abs_deviation: f64,
    pub t_worst: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

impl ComparisonReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_abs_deviation <= tolerance
    }
}

fn linear(time: &[f64], values: &[f64], t: f64) -> f64 {
    let k = time.partition_point(|&x| x <= t);
    if k == 0 {
        return values[0];
    }
    if k >= time.len() {
        return values[time.len() - 1];
    }
    let (t0, t1) = (time[k - 1], time[k]);
    let w = (t - t0) / (t1 - t0);
    values[k - 1] * (1.0 - w) + values[k] * w
}

/// Compares `(time_a, a)` with `(time_b, b)` at the samples of `a` inside
/// the overlap of both ranges, interpolating `b` linearly.
pub fn compare_series(
    time_a: &[f64],
    a: &[f64],
    time_b: &[f64],
    b: &[f64],
) -> Result<ComparisonReport> {
    if time_a.len() != a.len() || time_b.len() != b.len() || a.is_empty() || b.is_empty() {
        return Err(Error::Domain(
            "series must be non-empty and match their time grids".into(),
        ));
    }
    let lo = time_a[0].max(time_b[0]);
    let hi = time_a[time_a.len() - 1].min(time_b[time_b.len() - 1]);
    if hi < lo {
        return Err(Error::Domain(format!(
            "disjoint time windows (overlap [{lo}, {hi}] is empty)"
        )));
    }
    let tol = 1e-12 * hi.abs().max(1.0);
    let mut max = 0.0;
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut t_worst = lo;
    for (&t, &x) in time_a.iter().zip(a) {
        if t < lo - tol || t > hi + tol {
            continue;
        }
        let d = (x - linear(time_b, b, t)).abs();
        if !(d <= max) {
            max = d;
            t_worst = t;
        }
        sum += d;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Domain("no samples inside the common window".into()));
    }
    Ok(ComparisonReport {
        max_abs_deviation: max,
        mean_abs_deviation: sum / count as f64,
        t_worst,
        window: (lo, hi),
        samples: count,
    })
}

/// Compares channel `channel` of a master-equation trajectory with an exact series.
pub fn compare(
    master: &Trajectory,
    channel: usize,
    exact: &ExactSeries,
) -> Result<ComparisonReport> {
    let n = master
        .n
        .get(channel)
        .ok_or_else(|| Error::Domain(format!("trajectory has no channel {channel}")))?;
    compare_series(&master.time, n, &exact.time, &exact.n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(offset: f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let x = t.iter().map(|t| t.sin() + offset).collect();
        (t, x)
    }

    #[test]
    fn identical_inputs() {
        let (t, x) = series(0.0);
        let r = compare_series(&t, &x, &t, &x).unwrap();
        assert_eq!(r.max_abs_deviation, 0.0);
        assert_eq!(r.samples, 101);
    }

    #[test]
    fn constant_offset() {
        let (t, x) = series(0.0);
        let (_, y) = series(0.25);
        let r = compare_series(&t, &x, &t, &y).unwrap();
        assert!((r.max_abs_deviation - 0.25).abs() < 1e-14);
        assert!((r.mean_abs_deviation - 0.25).abs() < 1e-14);
    }

    #[test]
    fn disjoint_windows() {
        let (t, x) = series(0.0);
        let shifted: Vec<f64> = t.iter().map(|t| t + 20.0).collect();
        assert!(compare_series(&t, &x, &shifted, &x).is_err());
    }
}
