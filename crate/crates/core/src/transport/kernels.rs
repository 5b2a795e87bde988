//! Time-domain kernels A(t), B(t) and the frequency-resolved propagators
//! M(w, t), N(w, t), all as finite sums of exponentials over the
//! characteristic roots.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemSpec;
use crate::transport::roots::RootSet;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A, B and the per-bath parts of B with their time derivatives at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub a: Complex64,
    pub da: Complex64,
    pub b: Complex64,
    pub db: Complex64,
    pub b_parts: [Complex64; 2],
    pub db_parts: [Complex64; 2],
}

/// M, N and their time derivatives at one (w, t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagators {
    pub m: Complex64,
    pub dm: Complex64,
    pub n: Complex64,
    pub dn: Complex64,
}

/// Both kernel families at a fixed time (and frequency for M, N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelState {
    pub amplitudes: Amplitudes,
    pub propagators: Propagators,
}

/// Per-root factors of A and of the two parts of B (time independent).
#[derive(Debug, Clone, Copy)]
pub(crate) struct AmplitudeWeights {
    pub a: [Complex64; 4],
    pub b1: [Complex64; 4],
    pub b2: [Complex64; 4],
}

pub(crate) fn amplitude_weights(roots: &RootSet, spec: &SystemSpec) -> AmplitudeWeights {
    let omega = spec.omega();
    let [bath1, bath2] = spec.baths;
    let mut w = AmplitudeWeights {
        a: [Complex64::new(0.0, 0.0); 4],
        b1: [Complex64::new(0.0, 0.0); 4],
        b2: [Complex64::new(0.0, 0.0); 4],
    };
    for k in 0..4 {
        let s = roots.roots[k];
        let xi = roots.xi_prime[k];
        let h1 = bath1.alpha * bath1.gamma * bath1.gamma * (s + bath2.gamma);
        let h2 = bath2.alpha * bath2.gamma * bath2.gamma * (s + bath1.gamma);
        w.a[k] = I * xi * (s - I * omega) / (s + I * omega) * (h1 + h2);
        w.b1[k] = -I * xi * h1;
        w.b2[k] = -I * xi * h2;
    }
    w
}

/// Amplitudes multiplied by `exp(-shift t)`; with `shift` equal to the
/// largest root real part this stays O(1) at arbitrarily large t.
pub(crate) fn shifted_amplitudes(
    roots: &RootSet,
    spec: &SystemSpec,
    weights: &AmplitudeWeights,
    t: f64,
    shift: f64,
) -> Amplitudes {
    if spec.is_decoupled() {
        let omega = spec.omega();
        let a = Complex64::from_polar((-shift * t).exp(), -omega * t);
        let zero = Complex64::new(0.0, 0.0);
        return Amplitudes {
            a,
            da: -I * omega * a,
            b: zero,
            db: zero,
            b_parts: [zero; 2],
            db_parts: [zero; 2],
        };
    }
    let mut out = Amplitudes {
        a: Complex64::new(0.0, 0.0),
        da: Complex64::new(0.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        db: Complex64::new(0.0, 0.0),
        b_parts: [Complex64::new(0.0, 0.0); 2],
        db_parts: [Complex64::new(0.0, 0.0); 2],
    };
    for k in 0..4 {
        let s = roots.roots[k];
        let e = ((s - shift) * t).exp();
        let ea = weights.a[k] * e;
        let e1 = weights.b1[k] * e;
        let e2 = weights.b2[k] * e;
        out.a += ea;
        out.da += ea * s;
        out.b_parts[0] += e1;
        out.b_parts[1] += e2;
        out.db_parts[0] += e1 * s;
        out.db_parts[1] += e2 * s;
    }
    out.b = out.b_parts[0] + out.b_parts[1];
    out.db = out.db_parts[0] + out.db_parts[1];
    out
}

/// A(t), B(t), B_1(t), B_2(t) and their analytic time derivatives.
pub fn amplitudes_ab(roots: &RootSet, spec: &SystemSpec, t: f64) -> Result<Amplitudes> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    let weights = amplitude_weights(roots, spec);
    Ok(shifted_amplitudes(roots, spec, &weights, t, 0.0))
}

/// Five-node sums for M(w, t) and N(w, t) with the node s_0 = -i w.
pub fn propagators_mn(roots: &RootSet, spec: &SystemSpec, w: f64, t: f64) -> Result<Propagators> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::Domain(format!(
            "frequency must be finite and > 0, got {w}"
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    let omega = spec.omega();
    let (g1, g2) = (spec.baths[0].gamma, spec.baths[1].gamma);
    let p_n = |s: Complex64| (I * s - omega) * (s + g1) * (s + g2);
    let p_m = |s: Complex64| -(I * s + omega) * (s + g1) * (s + g2);
    let s0 = Complex64::new(0.0, -w);
    let scale = roots.roots.iter().fold(w, |m, s| m.max(s.norm()));
    let mut xi0 = Complex64::new(1.0, 0.0);
    for s in roots.roots {
        let d = s0 - s;
        if d.norm() < 1e-10 * scale {
            return Err(Error::Domain(format!(
                "node collision: -i w = {s0} coincides with root {s}"
            )));
        }
        xi0 /= d;
    }
    let e0 = (s0 * t).exp();
    let mut out = Propagators {
        m: xi0 * e0 * p_m(s0),
        dm: Complex64::new(0.0, 0.0),
        n: xi0 * e0 * p_n(s0),
        dn: Complex64::new(0.0, 0.0),
    };
    out.dm = out.m * s0;
    out.dn = out.n * s0;
    for k in 0..4 {
        let s = roots.roots[k];
        let xk = roots.xi_prime[k] / (s - s0);
        let e = (s * t).exp();
        let m = xk * e * p_m(s);
        let n = xk * e * p_n(s);
        out.m += m;
        out.n += n;
        out.dm += m * s;
        out.dn += n * s;
    }
    Ok(out)
}

/// Both kernel families at `(w, t)`.
pub fn kernel_state(roots: &RootSet, spec: &SystemSpec, w: f64, t: f64) -> Result<KernelState> {
    Ok(KernelState {
        amplitudes: amplitudes_ab(roots, spec, t)?,
        propagators: propagators_mn(roots, spec, w, t)?,
    })
}
