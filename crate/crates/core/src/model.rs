//! Parameter vocabulary: baths, oscillators, statistics and the bath spectral
//! density.
//!
//! Units throughout the crate: hbar = k_B = 1, frequencies in units of the
//! first oscillator's renormalized frequency, time in its inverse, and
//! temperatures as kT/(hbar Omega_1).

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Exchange statistics of a heat bath (or of an auxiliary oscillator).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Bosonic,
    Fermionic,
}

impl Statistics {
    /// The sign epsilon: +1 for bosons, -1 for fermions.
    pub fn sign(self) -> f64 {
        match self {
            Statistics::Bosonic => 1.0,
            Statistics::Fermionic => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistics::Bosonic => "bosonic",
            Statistics::Fermionic => "fermionic",
        }
    }
}

impl std::str::FromStr for Statistics {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bosonic" | "boson" | "b" => Ok(Statistics::Bosonic),
            "fermionic" | "fermion" | "f" => Ok(Statistics::Fermionic),
            other => Err(format!(
                "unknown statistics '{other}' (expected bosonic|fermionic)"
            )),
        }
    }
}

/// One heat bath with a Lorentzian-cutoff spectral density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub statistics: Statistics,
    /// Dimensionless coupling strength.
    pub alpha: f64,
    /// Lorentzian cutoff (inverse memory time).
    pub gamma: f64,
    pub temperature: f64,
}

impl BathSpec {
    /// Checked constructor. `alpha = 0` is admitted so that decoupled limits
    /// can be expressed; negative or non-finite values are rejected.
    pub fn new(statistics: Statistics, alpha: f64, gamma: f64, temperature: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return domain(format!("alpha must be finite and >= 0, got {alpha}"));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return domain(format!("gamma must be finite and > 0, got {gamma}"));
        }
        if !(temperature.is_finite() && temperature >= 0.0) {
            return domain(format!(
                "temperature must be finite and >= 0, got {temperature}"
            ));
        }
        Ok(BathSpec {
            statistics,
            alpha,
            gamma,
            temperature,
        })
    }

    pub fn bosonic(alpha: f64, gamma: f64, temperature: f64) -> Result<Self> {
        Self::new(Statistics::Bosonic, alpha, gamma, temperature)
    }

    pub fn fermionic(alpha: f64, gamma: f64, temperature: f64) -> Result<Self> {
        Self::new(Statistics::Fermionic, alpha, gamma, temperature)
    }

    pub fn with_statistics(mut self, statistics: Statistics) -> Self {
        self.statistics = statistics;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorSpec {
    /// Renormalized frequency Omega.
    pub omega_renormalized: f64,
    /// Bare frequency omega = Omega + 2 sum_l alpha_l gamma_l.
    pub omega_bare: f64,
}

/// Which statistics the two baths of one oscillator carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatisticsMode {
    AllBosonic,
    AllFermionic,
    /// Bath 1 fermionic, bath 2 bosonic.
    Mixed,
}

/// One oscillator with its two baths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    pub oscillator: OscillatorSpec,
    pub baths: [BathSpec; 2],
}

impl SystemSpec {
    /// Builds the system from its renormalized frequency. A mixed pair given
    /// as (bosonic, fermionic) is relabeled so that bath 1 is the fermionic one.
    pub fn new(omega_renormalized: f64, bath1: BathSpec, bath2: BathSpec) -> Result<Self> {
        let omega_bare = bare_frequency(omega_renormalized, &bath1, &bath2)?;
        let baths = match (bath1.statistics, bath2.statistics) {
            (Statistics::Bosonic, Statistics::Fermionic) => [bath2, bath1],
            _ => [bath1, bath2],
        };
        Ok(SystemSpec {
            oscillator: OscillatorSpec {
                omega_renormalized,
                omega_bare,
            },
            baths,
        })
    }

    pub fn omega(&self) -> f64 {
        self.oscillator.omega_bare
    }

    pub fn omega_renormalized(&self) -> f64 {
        self.oscillator.omega_renormalized
    }

    pub fn mode(&self) -> StatisticsMode {
        match (self.baths[0].statistics, self.baths[1].statistics) {
            (Statistics::Bosonic, Statistics::Bosonic) => StatisticsMode::AllBosonic,
            (Statistics::Fermionic, Statistics::Fermionic) => StatisticsMode::AllFermionic,
            _ => StatisticsMode::Mixed,
        }
    }

    /// Same-statistics statistics sign, `None` in mixed mode.
    pub fn common_statistics(&self) -> Option<Statistics> {
        match self.mode() {
            StatisticsMode::AllBosonic => Some(Statistics::Bosonic),
            StatisticsMode::AllFermionic => Some(Statistics::Fermionic),
            StatisticsMode::Mixed => None,
        }
    }

    /// Copy of the system with both baths switched to `statistics`; the
    /// frequencies, couplings, cutoffs and temperatures are kept.
    pub fn with_statistics(&self, statistics: Statistics) -> Self {
        SystemSpec {
            oscillator: self.oscillator,
            baths: [
                self.baths[0].with_statistics(statistics),
                self.baths[1].with_statistics(statistics),
            ],
        }
    }

    pub fn is_decoupled(&self) -> bool {
        self.baths[0].alpha == 0.0 && self.baths[1].alpha == 0.0
    }

    /// Soft warnings; currently only the fast-bath recommendation gamma >> omega.
    pub fn warnings(&self) -> Vec<String> {
        let omega = self.omega();
        self.baths
            .iter()
            .enumerate()
            .filter(|(_, b)| b.gamma < 5.0 * omega)
            .map(|(i, b)| {
                format!(
                    "bath {}: gamma = {} < 5 omega = {} (fast-bath regime not satisfied)",
                    i + 1,
                    b.gamma,
                    5.0 * omega
                )
            })
            .collect()
    }
}

/// Two oscillators, each with its own pair of baths, coupled with strength beta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledSpec {
    pub systems: [SystemSpec; 2],
    /// Oscillator-oscillator coupling (units of Omega_1^2).
    pub beta: f64,
}

impl CoupledSpec {
    pub fn new(first: SystemSpec, second: SystemSpec, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return domain(format!("beta must be finite and >= 0, got {beta}"));
        }
        Ok(CoupledSpec {
            systems: [first, second],
            beta,
        })
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.systems[0], self.systems[1], beta)
    }
}

/// Fermi-Dirac (eps = -1) or Bose-Einstein (eps = +1) occupation
/// 1/(exp(w/T) - eps). T = 0 returns the zero-temperature limit 0.
pub fn equilibrium_occupation(w: f64, temperature: f64, statistics: Statistics) -> Result<f64> {
    if !w.is_finite() || !temperature.is_finite() {
        return domain(format!("non-finite input (w = {w}, T = {temperature})"));
    }
    if w <= 0.0 {
        return domain(format!("frequency must be > 0, got {w}"));
    }
    if temperature < 0.0 {
        return domain(format!("temperature must be >= 0, got {temperature}"));
    }
    Ok(occupation_unchecked(w, temperature, statistics.sign()))
}

pub(crate) fn occupation_unchecked(w: f64, temperature: f64, eps: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    let x = w / temperature;
    if eps > 0.0 {
        1.0 / x.exp_m1()
    } else {
        1.0 / (x.exp() + 1.0)
    }
}

/// w * n(w, T), finite at w = 0 for bosons (limit T).
pub(crate) fn weighted_occupation(w: f64, temperature: f64, eps: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    if w == 0.0 {
        return if eps > 0.0 { temperature } else { 0.0 };
    }
    w * occupation_unchecked(w, temperature, eps)
}

/// Lorentzian spectral function (1/pi) alpha gamma^2 / (gamma^2 + w^2).
pub fn spectral_density(w: f64, bath: &BathSpec) -> Result<f64> {
    if !w.is_finite() || w < 0.0 {
        return domain(format!("frequency must be finite and >= 0, got {w}"));
    }
    let g2 = bath.gamma * bath.gamma;
    Ok(bath.alpha * g2 / (PI * (g2 + w * w)))
}

/// omega = Omega + 2 alpha_1 gamma_1 + 2 alpha_2 gamma_2.
pub fn bare_frequency(omega_renormalized: f64, bath1: &BathSpec, bath2: &BathSpec) -> Result<f64> {
    if !(omega_renormalized.is_finite() && omega_renormalized > 0.0) {
        return domain(format!(
            "renormalized frequency must be > 0, got {omega_renormalized}"
        ));
    }
    Ok(omega_renormalized + 2.0 * bath1.alpha * bath1.gamma + 2.0 * bath2.alpha * bath2.gamma)
}

/// Inverse of [`bare_frequency`].
pub fn renormalized_frequency(omega_bare: f64, bath1: &BathSpec, bath2: &BathSpec) -> f64 {
    omega_bare - 2.0 * bath1.alpha * bath1.gamma - 2.0 * bath2.alpha * bath2.gamma
}

/// p = alpha_1 / (alpha_1 + alpha_2).
pub fn mixing_fraction(bath1: &BathSpec, bath2: &BathSpec) -> Result<f64> {
    let total = bath1.alpha + bath2.alpha;
    if total <= 0.0 {
        return domain("mixing fraction undefined: both couplings are zero");
    }
    Ok(bath1.alpha / total)
}
