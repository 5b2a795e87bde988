//! Observables extracted from trajectories: dissipation energies, periods,
//! stationarity and anti-phase diagnostics.

use std::f64::consts::PI;

use crate::dynamics::trajectory::{evolve_coupled, CoupledInit, Trajectory};
use crate::error::{Error, Result};
use crate::model::CoupledSpec;
use crate::transport::CoefficientSeries;

/// Summary of the observables of one run; entries are `None` when not
/// applicable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservableReport {
    pub period: Option<PeriodEstimate>,
    pub stationarity: Option<Stationarity>,
    pub antiphase_correlation: Option<f64>,
    pub dissipation: Vec<Vec<f64>>,
    pub delta_dissipation: Option<DeltaDissipation>,
}

fn window_indices(time: &[f64], window: (f64, f64)) -> Result<(usize, usize)> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::Domain(format!("invalid window [{lo}, {hi}]")));
    }
    let tol = 1e-9 * hi.abs().max(1.0);
    let start = time.iter().position(|&t| t >= lo - tol);
    let end = time.iter().rposition(|&t| t <= hi + tol);
    match (start, end) {
        (Some(s), Some(e)) if e > s => Ok((s, e + 1)),
        _ => Err(Error::Domain(format!(
            "window [{lo}, {hi}] does not overlap the series"
        ))),
    }
}

/// E(t) = 2 Omega int_0^t lambda(t') n(t') dt' (cumulative trapezoid).
pub fn dissipation_energy(
    traj: &Trajectory,
    channel: usize,
    coeffs: &CoefficientSeries,
    omega: f64,
) -> Result<Vec<f64>> {
    if channel >= traj.channels() {
        return Err(Error::Domain(format!(
            "trajectory has no channel {channel}"
        )));
    }
    if traj.len() > coeffs.len()
        || (traj.len() > 1 && (traj.dt() - coeffs.dt()).abs() > 1e-12 * coeffs.dt())
    {
        return Err(Error::Domain(
            "trajectory and coefficient grids differ".into(),
        ));
    }
    let n = &traj.n[channel];
    let mut out = Vec::with_capacity(n.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..n.len() {
        let h = traj.time[k] - traj.time[k - 1];
        acc += 0.5 * h * (coeffs.lambda[k - 1] * n[k - 1] + coeffs.lambda[k] * n[k]);
        out.push(2.0 * omega * acc);
    }
    Ok(out)
}

/// Difference of dissipation energies between a coupled run and its
/// beta = 0 reference, with a windowed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaDissipation {
    pub time: Vec<f64>,
    pub energy: [Vec<f64>; 2],
    pub reference_energy: [Vec<f64>; 2],
    pub delta: [Vec<f64>; 2],
    /// (Delta E(t + W/2) - Delta E(t - W/2)) / W, NaN within W/2 of the ends.
    pub rate: [Vec<f64>; 2],
    /// Width W of the smoothing window (one period 2 pi / Omega_1).
    pub window: f64,
    /// Mean of |rate| over the times where it is defined.
    pub mean_abs_rate: [f64; 2],
}

/// Runs the coupled system and its decoupled reference on one grid and
/// returns both dissipation energies, their difference and its rate.
pub fn delta_dissipation(
    spec: &CoupledSpec,
    coeffs: [&CoefficientSeries; 2],
    init: &CoupledInit,
    t_max: f64,
) -> Result<DeltaDissipation> {
    let coupled = evolve_coupled(spec, coeffs[0], coeffs[1], init, t_max)?;
    let reference = evolve_coupled(&spec.with_beta(0.0)?, coeffs[0], coeffs[1], init, t_max)?;
    let mut energy: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut reference_energy: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut delta: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for c in 0..2 {
        let omega = spec.systems[c].omega_renormalized();
        energy[c] = dissipation_energy(&coupled, c, coeffs[c], omega)?;
        reference_energy[c] = dissipation_energy(&reference, c, coeffs[c], omega)?;
        delta[c] = energy[c]
            .iter()
            .zip(&reference_energy[c])
            .map(|(a, b)| a - b)
            .collect();
    }
    let window = 2.0 * PI / spec.systems[0].omega_renormalized();
    let dt = coupled.dt();
    let half = ((0.5 * window / dt).round() as usize).max(1);
    let len = coupled.len();
    let mut rate: [Vec<f64>; 2] = [vec![f64::NAN; len], vec![f64::NAN; len]];
    let mut mean_abs_rate = [f64::NAN; 2];
    for c in 0..2 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for k in half..len.saturating_sub(half) {
            let r = (delta[c][k + half] - delta[c][k - half]) / (2.0 * half as f64 * dt);
            rate[c][k] = r;
            sum += r.abs();
            count += 1;
        }
        if count > 0 {
            mean_abs_rate[c] = sum / count as f64;
        }
    }
    Ok(DeltaDissipation {
        time: coupled.time,
        energy,
        reference_energy,
        delta,
        rate,
        window: 2.0 * half as f64 * dt,
        mean_abs_rate,
    })
}

/// Period from upward zero crossings, with a spectral cross-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodEstimate {
    pub period: f64,
    pub period_std: f64,
    pub spectral_period: f64,
    /// Set when the crossing and spectral estimates differ by more than 5%.
    pub low_confidence: bool,
    pub crossings: usize,
}

/// Period of `series` over `window`: mean spacing of upward crossings of the
/// window mean, cross-checked against the dominant spectral peak.
pub fn estimate_period(time: &[f64], series: &[f64], window: (f64, f64)) -> Result<PeriodEstimate> {
    if time.len() != series.len() {
        return Err(Error::Domain("time and series lengths differ".into()));
    }
    let (s, e) = window_indices(time, window)?;
    let t = &time[s..e];
    let x = &series[s..e];
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let mut crossings = Vec::new();
    for k in 1..x.len() {
        let (a, b) = (x[k - 1] - mean, x[k] - mean);
        if a < 0.0 && b >= 0.0 {
            let frac = -a / (b - a);
            crossings.push(t[k - 1] + frac * (t[k] - t[k - 1]));
        }
    }
    if crossings.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} upward crossings in window [{}, {}], need at least 3",
            crossings.len(),
            window.0,
            window.1
        )));
    }
    let intervals: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let period = intervals.iter().sum::<f64>() / intervals.len() as f64;
    let var = intervals.iter().map(|d| (d - period).powi(2)).sum::<f64>() / intervals.len() as f64;
    let spectral_period = 1.0 / dominant_frequency(t, x, mean);
    let low_confidence = !((spectral_period - period).abs() <= 0.05 * period);
    Ok(PeriodEstimate {
        period,
        period_std: var.sqrt(),
        spectral_period,
        low_confidence,
        crossings: crossings.len(),
    })
}

fn dft_power(t: &[f64], x: &[f64], mean: f64, f: f64) -> f64 {
    let n = x.len();
    let span = t[n - 1] - t[0];
    let mut re = 0.0;
    let mut im = 0.0;
    for k in 0..n {
        let hann = 0.5 - 0.5 * (2.0 * PI * (t[k] - t[0]) / span).cos();
        let v = (x[k] - mean) * hann;
        let phase = 2.0 * PI * f * t[k];
        re += v * phase.cos();
        im += v * phase.sin();
    }
    re * re + im * im
}

fn dominant_frequency(t: &[f64], x: &[f64], mean: f64) -> f64 {
    let span = t[t.len() - 1] - t[0];
    let dt = span / (t.len() - 1) as f64;
    let nyquist = 0.5 / dt;
    let step = 0.25 / span;
    let mut best = (0.0, step);
    let mut f = step;
    while f < nyquist {
        let p = dft_power(t, x, mean, f);
        if p > best.0 {
            best = (p, f);
        }
        f += step;
    }
    // Golden-section refinement around the coarse peak.
    let (mut a, mut b) = ((best.1 - step).max(1e-12), best.1 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if dft_power(t, x, mean, c) > dft_power(t, x, mean, d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Result of a stationarity test over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stationarity {
    pub stationary: bool,
    /// (max - min) / max(|mean|, floor)
    pub variation: f64,
    pub tolerance: f64,
}

const STATIONARITY_FLOOR: f64 = 1e-12;

/// Relative spread of `values`; stationary iff below `tol`.
pub fn stationarity_of(values: &[f64], tol: f64) -> Result<Stationarity> {
    if values.is_empty() {
        return Err(Error::InsufficientData(
            "no samples for the stationarity test".into(),
        ));
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let variation = (max - min) / mean.abs().max(STATIONARITY_FLOOR);
    Ok(Stationarity {
        stationary: variation < tol,
        variation,
        tolerance: tol,
    })
}

/// Stationarity of `series` restricted to `window`.
pub fn detect_stationarity(
    time: &[f64],
    series: &[f64],
    window: (f64, f64),
    tol: f64,
) -> Result<Stationarity> {
    if time.len() != series.len() {
        return Err(Error::Domain("time and series lengths differ".into()));
    }
    let (s, e) = window_indices(time, window)?;
    stationarity_of(&series[s..e], tol)
}

/// Values of `series` at the interior local maxima of `key` within `window`.
pub fn sample_at_local_maxima(
    time: &[f64],
    key: &[f64],
    series: &[f64],
    window: (f64, f64),
) -> Result<Vec<f64>> {
    if time.len() != key.len() || time.len() != series.len() {
        return Err(Error::Domain("time, key and series lengths differ".into()));
    }
    let (s, e) = window_indices(time, window)?;
    Ok((s.max(1)..e.min(time.len() - 1))
        .filter(|&k| key[k] > key[k - 1] && key[k] >= key[k + 1])
        .map(|k| series[k])
        .collect())
}

/// Pearson correlation of two channels over `window`.
pub fn antiphase_metric(time: &[f64], n1: &[f64], n2: &[f64], window: (f64, f64)) -> Result<f64> {
    if time.len() != n1.len() || time.len() != n2.len() {
        return Err(Error::Domain("channels must share the time grid".into()));
    }
    let (s, e) = window_indices(time, window)?;
    let (a, b) = (&n1[s..e], &n2[s..e]);
    let len = a.len() as f64;
    let ma = a.iter().sum::<f64>() / len;
    let mb = b.iter().sum::<f64>() / len;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::UndefinedMetric(
            "zero variance in the correlation window".into(),
        ));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::TimeGrid;

    fn grid(t_max: f64, dt: f64) -> Vec<f64> {
        TimeGrid::covering(t_max, dt).unwrap().times()
    }

    #[test]
    fn period_of_sine() {
        let t = grid(40.0, 0.005);
        let omega = 1.3;
        let x: Vec<f64> = t.iter().map(|t| (omega * t).sin()).collect();
        let p = estimate_period(&t, &x, (3.0, 40.0)).unwrap();
        let want = 2.0 * PI / omega;
        assert!((p.period - want).abs() < 1e-3 * want, "{p:?}");
        assert!(!p.low_confidence, "{p:?}");
    }

    #[test]
    fn period_needs_crossings() {
        let t = grid(10.0, 0.01);
        let x = vec![1.0; t.len()];
        assert!(matches!(
            estimate_period(&t, &x, (0.0, 10.0)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn stationarity_examples() {
        let s = stationarity_of(&[2.0; 10], 0.01).unwrap();
        assert!(s.stationary);
        assert_eq!(s.variation, 0.0);
        let s = stationarity_of(&[1.0, 1.2, 0.9], 0.01).unwrap();
        assert!(!s.stationary);
    }

    #[test]
    fn correlation_examples() {
        let t = grid(20.0, 0.01);
        let s: Vec<f64> = t.iter().map(|t| t.sin()).collect();
        let m: Vec<f64> = s.iter().map(|x| -x).collect();
        assert!((antiphase_metric(&t, &s, &m, (0.0, 20.0)).unwrap() + 1.0).abs() < 1e-12);
        assert!((antiphase_metric(&t, &s, &s, (0.0, 20.0)).unwrap() - 1.0).abs() < 1e-12);
        let c = vec![1.0; t.len()];
        assert!(matches!(
            antiphase_metric(&t, &s, &c, (0.0, 20.0)),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn dissipation_closed_forms() {
        let g = TimeGrid::covering(5.0, 0.01).unwrap();
        let zero = CoefficientSeries::constant(g, 0.0, 0.0, 1.0);
        let tr = Trajectory {
            time: g.times(),
            n: vec![vec![0.4; g.len]],
            dn_dt: vec![vec![0.0; g.len]],
            source: String::new(),
        };
        assert!(dissipation_energy(&tr, 0, &zero, 1.0)
            .unwrap()
            .iter()
            .all(|&e| e == 0.0));
        let c = CoefficientSeries::constant(g, 0.3, 0.0, 1.0);
        let e = dissipation_energy(&tr, 0, &c, 1.5).unwrap();
        for (t, v) in g.times().iter().zip(&e) {
            let exact = 2.0 * 1.5 * 0.3 * 0.4 * t;
            assert!((v - exact).abs() <= 1e-8 * exact.max(1e-300));
        }
    }

    #[test]
    fn local_maxima_sampling() {
        let t = grid(20.0, 0.01);
        let key: Vec<f64> = t.iter().map(|t| t.sin()).collect();
        let vals: Vec<f64> = t.iter().map(|t| t.cos()).collect();
        let m = sample_at_local_maxima(&t, &key, &vals, (0.0, 20.0)).unwrap();
        assert_eq!(m.len(), 3);
        assert!(m.iter().all(|v| v.abs() < 0.01));
    }
}
