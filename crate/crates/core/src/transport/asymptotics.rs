//! Large-time limits of the bath integrals and the derived occupation numbers.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    mixing_fraction, occupation_unchecked, weighted_occupation, StatisticsMode, SystemSpec,
};
use crate::numerics::quadrature::{integrate_semi_infinite, QuadratureOptions};
use crate::transport::bath_integral::IntegralOptions;
use crate::transport::roots::characteristic_roots;

/// I^(lambda)(t -> inf) for bath `bath` (0 or 1), with that bath's own
/// statistics and temperature.
pub fn asymptotic_bath_integral(
    spec: &SystemSpec,
    bath: usize,
    opts: &IntegralOptions,
) -> Result<f64> {
    if bath > 1 {
        return Err(Error::Domain(format!(
            "bath index must be 0 or 1, got {bath}"
        )));
    }
    let own = spec.baths[bath];
    if own.alpha == 0.0 {
        return Ok(0.0);
    }
    let roots = characteristic_roots(spec)?;
    let other_gamma = spec.baths[1 - bath].gamma;
    let omega = spec.omega();
    let eps = own.statistics.sign();
    let squares: Vec<Complex64> = roots.roots.iter().map(|s| s * s).collect();
    let bad_denominator = Cell::new(None::<f64>);
    let integrand = |w: f64| -> [f64; 1] {
        let w2 = w * w;
        let mut denom = Complex64::new(1.0, 0.0);
        for s2 in &squares {
            denom *= s2 + w2;
        }
        if !(denom.re > 0.0) || denom.im.abs() > 1e-8 * denom.norm() {
            bad_denominator.set(Some(w));
            return [0.0];
        }
        let wn = weighted_occupation(w, own.temperature, eps);
        let plus = (omega + w) * (omega + w);
        let minus = (omega - w) * (omega - w);
        let numer = (other_gamma * other_gamma + w2) * ((plus + eps * minus) * wn + minus * w);
        [numer / denom.re]
    };
    let qopts = QuadratureOptions {
        rtol: opts.rtol,
        atol: 1e-15,
        initial_width: f64::INFINITY,
        max_panels: opts.max_panels,
    };
    let r = integrate_semi_infinite(integrand, 0.0, &qopts)?;
    if let Some(w) = bad_denominator.get() {
        return Err(Error::Domain(format!(
            "denominator prod_k (s_k^2 + w^2) is not real-positive at w = {w}"
        )));
    }
    Ok(own.alpha * own.gamma * own.gamma / PI * r.value[0])
}

/// Sum of the asymptotic bath integrals of a same-statistics system.
pub fn asymptotic_occupation(spec: &SystemSpec, opts: &IntegralOptions) -> Result<f64> {
    if spec.mode() == StatisticsMode::Mixed {
        return Err(Error::Domain(
            "asymptotic occupation is defined for same-statistics systems".into(),
        ));
    }
    if spec.is_decoupled() {
        return Err(Error::Domain(
            "both couplings are zero: the oscillator has no bath".into(),
        ));
    }
    Ok(asymptotic_bath_integral(spec, 0, opts)? + asymptotic_bath_integral(spec, 1, opts)?)
}

/// p n^eq_1(omega, T_1) + (1-p) n^eq_2(omega, T_2) at the bare frequency.
pub fn markovian_asymptote(spec: &SystemSpec) -> Result<f64> {
    let [b1, b2] = spec.baths;
    let p = mixing_fraction(&b1, &b2)?;
    let omega = spec.omega();
    Ok(
        p * occupation_unchecked(omega, b1.temperature, b1.statistics.sign())
            + (1.0 - p) * occupation_unchecked(omega, b2.temperature, b2.statistics.sign()),
    )
}

/// r = I_b/(1-p) - (I_f/p)/(1 - 2 I_f/p) from given asymptotic integrals.
pub fn stationarity_residual_from(i_f1: f64, i_b2: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "mixing fraction must lie in (0, 1), got {p}"
        )));
    }
    let x = i_f1 / p;
    let denominator = 1.0 - 2.0 * x;
    if denominator.abs() < 1e-12 {
        return Err(Error::Pole { denominator });
    }
    Ok(i_b2 / (1.0 - p) - x / denominator)
}

/// Residual of the stationarity condition for a mixed system; a small
/// |r| predicts a stationary D_1/lambda_1 at large time.
pub fn stationarity_condition_residual(spec: &SystemSpec, opts: &IntegralOptions) -> Result<f64> {
    if spec.mode() != StatisticsMode::Mixed {
        return Err(Error::Domain(
            "stationarity residual is defined for mixed systems".into(),
        ));
    }
    let p = mixing_fraction(&spec.baths[0], &spec.baths[1])?;
    let i_f1 = asymptotic_bath_integral(spec, 0, opts)?;
    let i_b2 = asymptotic_bath_integral(spec, 1, opts)?;
    stationarity_residual_from(i_f1, i_b2, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BathSpec, Statistics};

    fn fig1() -> SystemSpec {
        SystemSpec::new(
            1.0,
            BathSpec::fermionic(0.1, 10.0, 1.0).unwrap(),
            BathSpec::bosonic(0.05, 15.0, 0.1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn fig1_asymptotic_integrals() {
        // Independent prototype values from scipy quad.
        let opts = IntegralOptions {
            rtol: 1e-10,
            ..Default::default()
        };
        let i_f1 = asymptotic_bath_integral(&fig1(), 0, &opts).unwrap();
        let i_b2 = asymptotic_bath_integral(&fig1(), 1, &opts).unwrap();
        assert!((i_f1 - 0.14505).abs() < 1e-4, "{i_f1}");
        assert!((i_b2 - 0.050301).abs() < 1e-5, "{i_b2}");
        let r = stationarity_condition_residual(&fig1(), &opts).unwrap();
        assert!(r.abs() > 1e-3, "r = {r}");
    }

    #[test]
    fn markov_examples() {
        let b = BathSpec::bosonic(0.01, 10.0, 1.0).unwrap();
        let s = SystemSpec::new(0.6, b, b).unwrap();
        assert!((s.omega() - 1.0).abs() < 1e-15);
        let expect = 1.0 / (1f64.exp() - 1.0);
        assert!((markovian_asymptote(&s).unwrap() - expect).abs() < 1e-14);

        let b1 = BathSpec::bosonic(0.02, 10.0, 1.0).unwrap();
        let b2 = BathSpec::bosonic(0.01, 10.0, 0.1).unwrap();
        // bare frequency 1 requires a renormalized frequency 1 - 0.6
        let s = SystemSpec::new(0.4, b1, b2).unwrap();
        assert!((s.omega() - 1.0).abs() < 1e-14);
        let v = markovian_asymptote(&s).unwrap();
        assert!((v - 0.388).abs() < 1e-3, "{v}");

        let f = BathSpec::fermionic(0.01, 10.0, 1e9).unwrap();
        let s = SystemSpec::new(1.0, f, f).unwrap();
        assert!((markovian_asymptote(&s).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn residual_identities() {
        let p = 0.4;
        let x = 0.3;
        let r = stationarity_residual_from(p * x / (1.0 + 2.0 * x), (1.0 - p) * x, p).unwrap();
        assert!(r.abs() < 1e-14);
        assert_eq!(stationarity_residual_from(0.0, 0.0, 0.5).unwrap(), 0.0);
        assert!(matches!(
            stationarity_residual_from(0.25, 0.1, 0.5),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn zero_temperature_fermionic_keeps_vacuum_term() {
        let f = BathSpec::fermionic(0.05, 10.0, 0.0).unwrap();
        let s = SystemSpec::new(1.0, f, f).unwrap();
        let v = asymptotic_bath_integral(&s, 0, &IntegralOptions::default()).unwrap();
        assert!(v > 0.0);
        let b = s.with_statistics(Statistics::Bosonic);
        let vb = asymptotic_bath_integral(&b, 0, &IntegralOptions::default()).unwrap();
        assert!((v - vb).abs() < 1e-12 * v);
    }

    #[test]
    fn zero_coupling_cases() {
        let zero = BathSpec::bosonic(0.0, 10.0, 1.0).unwrap();
        let one = BathSpec::bosonic(0.1, 10.0, 1.0).unwrap();
        let s = SystemSpec::new(1.0, one, zero).unwrap();
        assert_eq!(
            asymptotic_bath_integral(&s, 1, &IntegralOptions::default()).unwrap(),
            0.0
        );
        let s = SystemSpec::new(1.0, zero, zero).unwrap();
        assert!(asymptotic_occupation(&s, &IntegralOptions::default()).is_err());
    }
}
