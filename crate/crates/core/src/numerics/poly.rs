//! Roots of real monic quartics.

use nalgebra::Matrix4;
use num_complex::Complex64;

/// Evaluates `sum c[i] s^i` and its derivative (Horner).
pub fn eval_with_derivative(coeffs: &[f64], s: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * s + p;
        p = p * s + c;
    }
    (p, dp)
}

/// All four roots of `s^4 + c3 s^3 + c2 s^2 + c1 s + c0`, with `coeffs = [c0, c1, c2, c3, 1]`.
/// Companion-matrix eigenvalues followed by Newton polishing; sorted by
/// real part, then imaginary part.
pub fn quartic_roots(coeffs: &[f64; 5]) -> [Complex64; 4] {
    let lead = coeffs[4];
    let c: Vec<f64> = coeffs.iter().map(|x| x / lead).collect();
    let companion = Matrix4::new(
        0.0, 0.0, 0.0, -c[0], 1.0, 0.0, 0.0, -c[1], 0.0, 1.0, 0.0, -c[2], 0.0, 0.0, 1.0, -c[3],
    );
    let eig = companion.complex_eigenvalues();
    let mut roots = [Complex64::new(0.0, 0.0); 4];
    for (r, e) in roots.iter_mut().zip(eig.iter()) {
        *r = polish(&c, Complex64::new(e.re, e.im));
    }
    // Real coefficients: make conjugate pairs exact.
    for r in roots.iter_mut() {
        if r.im.abs() <= 1e-13 * r.norm().max(1.0) {
            r.im = 0.0;
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for k in 0..3 {
        let (a, b) = (roots[k], roots[k + 1]);
        if a.im != 0.0 && (a - b.conj()).norm() <= 1e-10 * a.norm().max(1.0) {
            let re = 0.5 * (a.re + b.re);
            let im = 0.5 * (a.im.abs() + b.im.abs());
            roots[k] = Complex64::new(re, -im);
            roots[k + 1] = Complex64::new(re, im);
        }
    }
    roots
}

fn polish(c: &[f64], mut s: Complex64) -> Complex64 {
    for _ in 0..60 {
        let (p, dp) = eval_with_derivative(c, s);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        s -= step;
        if step.norm() <= 1e-16 * s.norm().max(1e-300) {
            break;
        }
    }
    s
}
