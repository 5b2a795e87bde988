//! Uniform discretization of a Lorentzian bath into harmonic modes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{occupation_unchecked, spectral_density, BathSpec, Statistics};

/// Minimum number of modes accepted by [`sample_bath`].
pub const MIN_MODES: usize = 50;
/// Minimum ratio w_max / gamma accepted by [`sample_bath`].
pub const MIN_CUTOFF_RATIO: f64 = 10.0;

/// Finite set of bath modes w_i = i dw, i = 1..N, with couplings
/// alpha_i^2 = w_i dw rho(w_i) and thermal initial occupations.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedBath {
    pub statistics: Statistics,
    pub mode_frequencies: Vec<f64>,
    pub mode_couplings: Vec<f64>,
    pub initial_occupations: Vec<f64>,
    pub spacing: f64,
}

impl DiscretizedBath {
    pub fn len(&self) -> usize {
        self.mode_frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mode_frequencies.is_empty()
    }

    pub fn w_max(&self) -> f64 {
        self.mode_frequencies.last().copied().unwrap_or(0.0)
    }

    /// Revival time 2 pi / dw of the finite mode set.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing
    }

    /// sum_i alpha_i^2 / w_i, the discrete analogue of int rho(w) dw.
    pub fn reorganization_sum(&self) -> f64 {
        self.mode_couplings
            .iter()
            .zip(&self.mode_frequencies)
            .map(|(a, w)| a * a / w)
            .sum()
    }
}

/// Samples `n_modes` modes of `bath` on the uniform grid (0, w_max].
pub fn sample_bath(bath: &BathSpec, n_modes: usize, w_max: f64) -> Result<DiscretizedBath> {
    if n_modes < MIN_MODES {
        return Err(Error::Domain(format!(
            "need at least {MIN_MODES} modes, got {n_modes}"
        )));
    }
    if !(w_max.is_finite() && w_max >= MIN_CUTOFF_RATIO * bath.gamma) {
        return Err(Error::Domain(format!(
            "w_max = {w_max} must be finite and at least {MIN_CUTOFF_RATIO} gamma = {}",
            MIN_CUTOFF_RATIO * bath.gamma
        )));
    }
    let spacing = w_max / n_modes as f64;
    let mut mode_frequencies = Vec::with_capacity(n_modes);
    let mut mode_couplings = Vec::with_capacity(n_modes);
    let mut initial_occupations = Vec::with_capacity(n_modes);
    for i in 1..=n_modes {
        let w = spacing * i as f64;
        mode_frequencies.push(w);
        mode_couplings.push((w * spacing * spectral_density(w, bath)?).sqrt());
        initial_occupations.push(occupation_unchecked(
            w,
            bath.temperature,
            bath.statistics.sign(),
        ));
    }
    Ok(DiscretizedBath {
        statistics: bath.statistics,
        mode_frequencies,
        mode_couplings,
        initial_occupations,
        spacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reorganization_sum_converges_to_truncated_lorentzian() {
        let bath = BathSpec::bosonic(0.01, 10.0, 1.0).unwrap();
        // int_0^W rho(w) dw = (alpha gamma / pi) atan(W / gamma)
        let exact = bath.alpha * bath.gamma / PI * (200.0f64 / 10.0).atan();
        let err = |n: usize| {
            (sample_bath(&bath, n, 200.0).unwrap().reorganization_sum() - exact).abs() / exact
        };
        let (e1, e2) = (err(400), err(800));
        assert!(e1 < 0.02, "relative error {e1}");
        assert!((e1 / e2 - 2.0).abs() < 0.1, "first-order ratio {}", e1 / e2);
    }

    #[test]
    fn zero_coupling_gives_zero_couplings() {
        let bath = BathSpec::bosonic(0.0, 10.0, 1.0).unwrap();
        let d = sample_bath(&bath, 60, 100.0).unwrap();
        assert!(d.mode_couplings.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn grid_and_occupations() {
        let bath = BathSpec::bosonic(0.02, 5.0, 2.0).unwrap();
        let d = sample_bath(&bath, 100, 50.0).unwrap();
        assert_eq!(d.len(), 100);
        assert!((d.spacing - 0.5).abs() < 1e-15);
        assert!((d.w_max() - 50.0).abs() < 1e-12);
        assert!((d.initial_occupations[1] - 1.0 / (0.5f64).exp_m1()).abs() < 1e-14);
        assert!((d.recurrence_time() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        let bath = BathSpec::bosonic(0.02, 5.0, 2.0).unwrap();
        assert!(sample_bath(&bath, 49, 50.0).is_err());
        assert!(sample_bath(&bath, 100, 49.0).is_err());
    }
}
