//! Characteristic roots of the oscillator-plus-Lorentzian-baths problem.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemSpec;
use crate::numerics::poly::{eval_with_derivative, quartic_roots};

/// The four characteristic frequencies with their partial-fraction weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSet {
    pub roots: [Complex64; 4],
    /// xi'_k = prod_{i != k} 1/(s_k - s_i)
    pub xi_prime: [Complex64; 4],
    /// Monic quartic `[c0, c1, c2, c3, 1]` (ascending powers).
    pub quartic_coefficients: [f64; 5],
}

impl RootSet {
    /// Largest real part (the slowest decay rate, negative for stable systems).
    pub fn max_real_part(&self) -> f64 {
        self.roots
            .iter()
            .map(|s| s.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// |q(s_k)| for each root.
    pub fn residuals(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (o, s) in out.iter_mut().zip(self.roots.iter()) {
            *o = eval_with_derivative(&self.quartic_coefficients, *s)
                .0
                .norm();
        }
        out
    }
}

/// Coefficients of (s^2 + omega Omega)(s + g1)(s + g2) + 2 s omega [a1 g1 (s + g2) + a2 g2 (s + g1)].
pub fn quartic_coefficients(spec: &SystemSpec) -> [f64; 5] {
    let omega = spec.omega();
    let big = spec.omega_renormalized();
    let [b1, b2] = spec.baths;
    let (g1, g2) = (b1.gamma, b2.gamma);
    let sum = g1 + g2;
    let prod = g1 * g2;
    let wo = omega * big;
    [
        wo * prod,
        wo * sum + 2.0 * omega * prod * (b1.alpha + b2.alpha),
        prod + wo + 2.0 * omega * (b1.alpha * g1 + b2.alpha * g2),
        sum,
        1.0,
    ]
}

/// Solves the quartic, polishes the roots and checks residuals, stability
/// and separation. A decoupled system (both couplings zero) is allowed to
/// keep its marginal pair `+-i omega`.
pub fn characteristic_roots(spec: &SystemSpec) -> Result<RootSet> {
    let coeffs = quartic_coefficients(spec);
    let roots = quartic_roots(&coeffs);
    let max_coeff = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let tolerance = 1e-9 * max_coeff;
    for s in &roots {
        let residual = eval_with_derivative(&coeffs, *s).0.norm();
        if !(residual <= tolerance) {
            return Err(Error::RootResidual {
                residual,
                tolerance,
            });
        }
    }
    let decoupled = spec.is_decoupled();
    for s in &roots {
        let unstable = if decoupled {
            s.re > 1e-12 * s.norm().max(1.0)
        } else {
            s.re >= 0.0
        };
        if unstable {
            return Err(Error::UnstableRoot { re: s.re, im: s.im });
        }
    }
    let scale = roots.iter().fold(0.0f64, |m, s| m.max(s.norm()));
    let mut separation = f64::INFINITY;
    for j in 0..4 {
        for k in (j + 1)..4 {
            separation = separation.min((roots[j] - roots[k]).norm());
        }
    }
    if separation < 1e-8 * scale {
        return Err(Error::DegenerateRoots { separation, scale });
    }
    let mut xi_prime = [Complex64::new(0.0, 0.0); 4];
    for k in 0..4 {
        let mut denom = Complex64::new(1.0, 0.0);
        for i in 0..4 {
            if i != k {
                denom *= roots[k] - roots[i];
            }
        }
        xi_prime[k] = 1.0 / denom;
    }
    Ok(RootSet {
        roots,
        xi_prime,
        quartic_coefficients: coeffs,
    })
}
