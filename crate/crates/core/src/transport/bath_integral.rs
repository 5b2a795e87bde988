//! The bath integrals I^(lambda)(t) and their time derivatives.
//!
//! The integrand splits into a temperature-independent vacuum part
//! `w/(gamma^2+w^2) |N|^2` and a thermal part weighted by `n(w)`. After the
//! partial-fraction rewrite
//!
//! `N(w,t)/(gamma - i w) = sum_j (a_j - e^{-iwt} b_j) / (w - pi_j)`
//!
//! with the five poles `pi_k = i s_k` and `pi_5 = -i gamma`, the vacuum part
//! integrates in closed form through logarithms and the exponential integral.
//! The thermal part is a rapidly converging integral over `w <~ 20 T` and is
//! evaluated by adaptive quadrature. The direct quadrature of the whole
//! integrand is kept in [`bath_integral_quadrature`] as an independent route.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{occupation_unchecked, weighted_occupation, SystemSpec};
use crate::numerics::expint::{exp_e1, exp_neg_ei};
use crate::numerics::quadrature::{integrate, integrate_until_negligible, QuadratureOptions};
use crate::transport::kernels::propagators_mn;
use crate::transport::roots::RootSet;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Quadrature controls for the bath integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralOptions {
    /// Relative tolerance of the adaptive quadrature.
    pub rtol: f64,
    /// The thermal integration range starts as `[0, w_max_factor * T]` and is
    /// extended until the tail is negligible.
    pub w_max_factor: f64,
    pub max_panels: usize,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        IntegralOptions {
            rtol: 1e-7,
            w_max_factor: 20.0,
            max_panels: 20_000,
        }
    }
}

/// I^(lambda)(t), its time derivative and the quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BathIntegral {
    pub value: f64,
    pub derivative: f64,
    pub error: f64,
}

/// Precomputed per-bath data: the propagator coefficients with the factor
/// (s_k + gamma_lambda) removed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BathKernel {
    pub roots: [Complex64; 4],
    pub gamma: f64,
    pub prefactor: f64,
    pub eps: f64,
    pub temperature: f64,
    pub ct_m: [Complex64; 4],
    pub ct_n: [Complex64; 4],
    pub initial_width_scale: f64,
}

impl BathKernel {
    pub fn new(roots: &RootSet, spec: &SystemSpec, bath: usize) -> Result<Self> {
        if bath > 1 {
            return Err(Error::Domain(format!(
                "bath index must be 0 or 1, got {bath}"
            )));
        }
        let own = spec.baths[bath];
        let other = spec.baths[1 - bath];
        let omega = spec.omega();
        let mut ct_m = [Complex64::new(0.0, 0.0); 4];
        let mut ct_n = [Complex64::new(0.0, 0.0); 4];
        for k in 0..4 {
            let s = roots.roots[k];
            let base = roots.xi_prime[k] * (s + other.gamma);
            ct_n[k] = base * (I * s - omega);
            ct_m[k] = -base * (I * s + omega);
        }
        Ok(BathKernel {
            roots: roots.roots,
            gamma: own.gamma,
            prefactor: own.alpha * own.gamma * own.gamma / PI,
            eps: own.statistics.sign(),
            temperature: own.temperature,
            ct_m,
            ct_n,
            initial_width_scale: 1.0 / spec.omega_renormalized(),
        })
    }

    fn initial_width(&self, t: f64) -> f64 {
        (self.gamma / 4.0).min(PI / (4.0 * t.max(self.initial_width_scale)))
    }

    /// Thermal integrand `[w n (|M~|^2 + eps |N~|^2), d/dt of it]`.
    fn thermal_integrand(&self, w: f64, t: f64, exps: &[Complex64; 4]) -> [f64; 2] {
        let wn = weighted_occupation(w, self.temperature, self.eps);
        if wn == 0.0 {
            return [0.0, 0.0];
        }
        let e0 = Complex64::from_polar(1.0, -w * t);
        let tail = 1.0 / Complex64::new(self.gamma, -w);
        let mut m = Complex64::new(0.0, 0.0);
        let mut dm = Complex64::new(0.0, 0.0);
        let mut n = Complex64::new(0.0, 0.0);
        let mut dn = Complex64::new(0.0, 0.0);
        for (k, (&s, &e)) in self.roots.iter().zip(exps.iter()).enumerate() {
            let f = 1.0 / (s + I * w) + tail;
            let diff = (e - e0) * f;
            let ddiff = (s * e + I * w * e0) * f;
            m += self.ct_m[k] * diff;
            dm += self.ct_m[k] * ddiff;
            n += self.ct_n[k] * diff;
            dn += self.ct_n[k] * ddiff;
        }
        let value = m.norm_sqr() + self.eps * n.norm_sqr();
        let rate = 2.0 * ((m.conj() * dm).re + self.eps * (n.conj() * dn).re);
        [wn * value, wn * rate]
    }

    /// Closed-form vacuum integral `int_0^inf w/(gamma^2+w^2) |N|^2 dw` and its
    /// time derivative.
    pub fn vacuum(&self, t: f64) -> (f64, f64) {
        if t == 0.0 {
            return (0.0, 0.0);
        }
        let mut poles = [Complex64::new(0.0, 0.0); 5];
        let mut a = [Complex64::new(0.0, 0.0); 5];
        let mut b = [Complex64::new(0.0, 0.0); 5];
        let mut a1 = [Complex64::new(0.0, 0.0); 5];
        let mut sum_a = Complex64::new(0.0, 0.0);
        let mut sum_b = Complex64::new(0.0, 0.0);
        let mut sum_a1 = Complex64::new(0.0, 0.0);
        for k in 0..4 {
            let s = self.roots[k];
            let e = (s * t).exp();
            poles[k] = I * s;
            a[k] = -I * self.ct_n[k] * e;
            b[k] = -I * self.ct_n[k];
            a1[k] = a[k] * s;
            sum_a += self.ct_n[k] * e;
            sum_b += self.ct_n[k];
            sum_a1 += self.ct_n[k] * e * s;
        }
        poles[4] = Complex64::new(0.0, -self.gamma);
        a[4] = I * sum_a;
        b[4] = I * sum_b;
        a1[4] = I * sum_a1;
        let mut b1 = [Complex64::new(0.0, 0.0); 5];
        for j in 0..5 {
            b1[j] = -I * poles[j] * b[j];
        }

        // p runs over conj(poles) (upper half plane), q over poles (lower).
        let mut p_plus = [Complex64::new(0.0, 0.0); 5];
        let mut p_minus = [Complex64::new(0.0, 0.0); 5];
        let mut q_plus = [Complex64::new(0.0, 0.0); 5];
        let mut q_minus = [Complex64::new(0.0, 0.0); 5];
        let mut p_log = [Complex64::new(0.0, 0.0); 5];
        let mut q_log = [Complex64::new(0.0, 0.0); 5];
        for j in 0..5 {
            let p = poles[j].conj();
            let q = poles[j];
            p_plus[j] = p * e_plus(p, t);
            p_minus[j] = p * e_minus(p, t);
            q_plus[j] = q * e_plus(q, t);
            q_minus[j] = q * e_minus(q, t);
            p_log[j] = p * (-p).ln();
            q_log[j] = q * (-q).ln();
        }
        let mut v0 = Complex64::new(0.0, 0.0);
        let mut v1 = Complex64::new(0.0, 0.0);
        for j in 0..5 {
            let p = poles[j].conj();
            let (aj, bj) = (a[j].conj(), b[j].conj());
            for m in 0..5 {
                let q = poles[m];
                let inv = 1.0 / (p - q);
                let k0 = -(p_log[j] - q_log[m]) * inv;
                let kp = (p_plus[j] - q_plus[m]) * inv;
                let km = (p_minus[j] - q_minus[m]) * inv;
                v0 += (aj * a[m] + bj * b[m]) * k0 - aj * b[m] * km - bj * a[m] * kp;
                v1 += (aj * a1[m] + bj * b1[m]) * k0 - aj * b1[m] * km - bj * a1[m] * kp;
            }
        }
        (v0.re, 2.0 * v1.re)
    }
}

/// `int_0^inf e^{iwt}/(w - p) dw` scaled as used by the vacuum kernels,
/// i.e. `e^{z} E1(z)` with `z = i p t` continued across the positive
/// imaginary axis of `p`.
fn e_plus(p: Complex64, t: f64) -> Complex64 {
    if p.re.abs() <= 1e-14 * p.norm() && p.im > 0.0 {
        let x = p.im * t;
        return Complex64::new(-exp_neg_ei(x), PI * (-x).exp());
    }
    let z = I * p * t;
    let mut v = exp_e1(z);
    if p.re > 0.0 && p.im > 0.0 {
        v += 2.0 * PI * I * z.exp();
    }
    v
}

fn e_minus(q: Complex64, t: f64) -> Complex64 {
    e_plus(q.conj(), t).conj()
}

fn check_bath(spec: &SystemSpec, bath: usize, t: f64) -> Result<()> {
    if bath > 1 {
        return Err(Error::Domain(format!(
            "bath index must be 0 or 1, got {bath}"
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    let _ = spec;
    Ok(())
}

pub(crate) fn bath_integral_with_kernel(
    kernel: &BathKernel,
    t: f64,
    opts: &IntegralOptions,
) -> Result<BathIntegral> {
    if kernel.prefactor == 0.0 || t == 0.0 {
        return Ok(BathIntegral::default());
    }
    let (v0, v1) = kernel.vacuum(t);
    let mut thermal = [0.0, 0.0];
    let mut thermal_err = 0.0;
    if kernel.temperature > 0.0 {
        let exps = [
            (kernel.roots[0] * t).exp(),
            (kernel.roots[1] * t).exp(),
            (kernel.roots[2] * t).exp(),
            (kernel.roots[3] * t).exp(),
        ];
        let qopts = QuadratureOptions {
            rtol: opts.rtol,
            atol: 1e-15 / kernel.prefactor.max(1e-300),
            initial_width: kernel.initial_width(t),
            max_panels: opts.max_panels,
        };
        let cutoff = opts.w_max_factor * kernel.temperature;
        let r = integrate_until_negligible(
            |w| kernel.thermal_integrand(w, t, &exps),
            0.0,
            cutoff,
            &qopts,
            60,
        )?;
        thermal = r.value;
        thermal_err = r.error[0];
    }
    let value = kernel.prefactor * (v0 + thermal[0]);
    let derivative = kernel.prefactor * (v1 + thermal[1]);
    if !value.is_finite() || !derivative.is_finite() {
        return Err(Error::NonFinite { t });
    }
    let error = kernel.prefactor * (thermal_err + 1e-13 * v0.abs());
    Ok(BathIntegral {
        value,
        derivative,
        error,
    })
}

/// I^(lambda)(t) and dI^(lambda)/dt for bath `bath` (0 for bath 1, 1 for bath 2),
/// using the bath's own statistics and temperature.
pub fn bath_integral(
    roots: &RootSet,
    spec: &SystemSpec,
    bath: usize,
    t: f64,
    opts: &IntegralOptions,
) -> Result<BathIntegral> {
    check_bath(spec, bath, t)?;
    let kernel = BathKernel::new(roots, spec, bath)?;
    bath_integral_with_kernel(&kernel, t, opts)
}

/// The same integral by direct adaptive quadrature of the five-node
/// integrand over `(0, w_max]`. Slower; the neglected tail beyond `w_max`
/// decays like `w_max^-2`.
pub fn bath_integral_quadrature(
    roots: &RootSet,
    spec: &SystemSpec,
    bath: usize,
    t: f64,
    w_max: f64,
    opts: &IntegralOptions,
) -> Result<BathIntegral> {
    check_bath(spec, bath, t)?;
    let own = spec.baths[bath];
    if own.alpha == 0.0 || t == 0.0 {
        return Ok(BathIntegral::default());
    }
    let eps = own.statistics.sign();
    let g2 = own.gamma * own.gamma;
    let integrand = |w: f64| -> [f64; 2] {
        if w <= 0.0 {
            return [0.0, 0.0];
        }
        let p = match propagators_mn(roots, spec, w, t) {
            Ok(p) => p,
            Err(_) => return [f64::NAN, f64::NAN],
        };
        let n = occupation_unchecked(w, own.temperature, eps);
        let weight = w / (g2 + w * w);
        let value = n * p.m.norm_sqr() + (1.0 + eps * n) * p.n.norm_sqr();
        let rate = 2.0 * (n * (p.m.conj() * p.dm).re + (1.0 + eps * n) * (p.n.conj() * p.dn).re);
        [weight * value, weight * rate]
    };
    let qopts = QuadratureOptions {
        rtol: opts.rtol,
        atol: 1e-16,
        initial_width: (own.gamma / 4.0).min(PI / (4.0 * t.max(1.0 / spec.omega_renormalized()))),
        max_panels: opts.max_panels,
    };
    let r = integrate(integrand, 0.0, w_max, &qopts)?;
    let pref = own.alpha * g2 / PI;
    Ok(BathIntegral {
        value: pref * r.value[0],
        derivative: pref * r.value[1],
        error: pref * r.error[0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BathSpec;
    use crate::transport::roots::characteristic_roots;

    fn fig1() -> (SystemSpec, RootSet) {
        let spec = SystemSpec::new(
            1.0,
            BathSpec::fermionic(0.1, 10.0, 1.0).unwrap(),
            BathSpec::bosonic(0.05, 15.0, 0.1).unwrap(),
        )
        .unwrap();
        let roots = characteristic_roots(&spec).unwrap();
        (spec, roots)
    }

    #[test]
    fn vacuum_reference_values() {
        // Brute-force trapezoid on [0, 3000] with 1.2e6 nodes (independent
        // prototype); the truncated tail is below 1e-7 relative.
        let (spec, roots) = fig1();
        let k1 = BathKernel::new(&roots, &spec, 0).unwrap();
        let k2 = BathKernel::new(&roots, &spec, 1).unwrap();
        let cases = [
            (
                0.1,
                0.009_159_884_004,
                0.096_605_980,
                0.006_361_690_965,
                0.055_173_930,
            ),
            (
                1.0,
                0.041_907_018_006,
                -0.034_020_296,
                0.021_450_446_116,
                -0.021_227_941,
            ),
            (
                5.0,
                0.028_991_336_870,
                0.000_203_448_846,
                0.013_893_227_118,
                0.000_091_710_168,
            ),
        ];
        for (t, v1, d1, v2, d2) in cases {
            let (a, da) = k1.vacuum(t);
            let (b, db) = k2.vacuum(t);
            assert!((a - v1).abs() < 2e-5 * v1.abs(), "t={t}: {a} vs {v1}");
            assert!((b - v2).abs() < 2e-5 * v2.abs(), "t={t}: {b} vs {v2}");
            assert!(
                (da - d1).abs() < 1e-4 * d1.abs().max(1e-3),
                "t={t}: {da} vs {d1}"
            );
            assert!(
                (db - d2).abs() < 1e-4 * d2.abs().max(1e-3),
                "t={t}: {db} vs {d2}"
            );
        }
    }

    #[test]
    fn zero_at_origin_and_zero_coupling() {
        let (spec, roots) = fig1();
        for bath in 0..2 {
            let r = bath_integral(&roots, &spec, bath, 0.0, &IntegralOptions::default()).unwrap();
            assert_eq!(r.value, 0.0);
            assert_eq!(r.derivative, 0.0);
        }
        let s = SystemSpec::new(
            1.0,
            BathSpec::bosonic(0.1, 10.0, 1.0).unwrap(),
            BathSpec::bosonic(0.0, 15.0, 0.1).unwrap(),
        )
        .unwrap();
        let r = characteristic_roots(&s).unwrap();
        for t in [0.5, 3.0] {
            assert_eq!(
                bath_integral(&r, &s, 1, t, &IntegralOptions::default())
                    .unwrap()
                    .value,
                0.0
            );
        }
    }

    #[test]
    fn small_time_is_small() {
        let (spec, roots) = fig1();
        let r = bath_integral(&roots, &spec, 0, 1e-6, &IntegralOptions::default()).unwrap();
        assert!(r.value.abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn closed_form_matches_direct_quadrature() {
        let (spec, roots) = fig1();
        let opts = IntegralOptions {
            rtol: 1e-9,
            ..Default::default()
        };
        for bath in 0..2 {
            for t in [0.2, 1.5, 4.0] {
                let fast = bath_integral(&roots, &spec, bath, t, &opts).unwrap();
                // The truncated tail decays like w_max^-2; two cutoffs give a
                // Richardson estimate of the full integral.
                let big = IntegralOptions {
                    max_panels: 200_000,
                    ..opts
                };
                let a = bath_integral_quadrature(&roots, &spec, bath, t, 2000.0, &big).unwrap();
                let b = bath_integral_quadrature(&roots, &spec, bath, t, 8000.0, &big).unwrap();
                let slow = BathIntegral {
                    value: b.value + (b.value - a.value) / 15.0,
                    derivative: b.derivative + (b.derivative - a.derivative) / 15.0,
                    error: 0.0,
                };
                assert!(
                    (fast.value - slow.value).abs() < 1e-7 * fast.value.abs(),
                    "bath {bath} t {t}: {} vs {}",
                    fast.value,
                    slow.value
                );
                assert!(
                    (fast.derivative - slow.derivative).abs()
                        < 1e-5 * fast.derivative.abs().max(1e-3),
                    "bath {bath} t {t}: {} vs {}",
                    fast.derivative,
                    slow.derivative
                );
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (spec, roots) = fig1();
        let opts = IntegralOptions {
            rtol: 1e-10,
            ..Default::default()
        };
        let h = 1e-4;
        for bath in 0..2 {
            for t in [0.7, 2.0, 6.0] {
                let c = bath_integral(&roots, &spec, bath, t, &opts).unwrap();
                let p = bath_integral(&roots, &spec, bath, t + h, &opts).unwrap();
                let m = bath_integral(&roots, &spec, bath, t - h, &opts).unwrap();
                let fd = (p.value - m.value) / (2.0 * h);
                assert!(
                    (fd - c.derivative).abs() <= 1e-4 * c.derivative.abs().max(1e-4),
                    "bath {bath} t {t}: {fd} vs {}",
                    c.derivative
                );
            }
        }
    }
}
