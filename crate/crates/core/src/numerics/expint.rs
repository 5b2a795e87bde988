//! Exponentially scaled exponential integrals.

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Radius beyond which the asymptotic expansion is used.
const ASYMPTOTIC_RADIUS: f64 = 40.0;
/// Radius below which the power series is used everywhere.
const SERIES_RADIUS: f64 = 5.0;

/// `e^z E1(z)` on the principal branch (cut along the negative real axis,
/// approached from above when `Im z` is zero). `z` must be nonzero.
pub fn exp_e1(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r >= ASYMPTOTIC_RADIUS {
        asymptotic(z)
    } else if r <= SERIES_RADIUS || z.re < -2.0 * z.im.abs() {
        z.exp() * e1_series(z)
    } else {
        continued_fraction(z)
    }
}

/// `e^{-x} Ei(x)` for `x > 0`.
pub fn exp_neg_ei(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= ASYMPTOTIC_RADIUS {
        // Ei(x) e^{-x} ~ (1/x) sum k!/x^k
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            let next = term * k / x;
            if next >= term || next < 1e-17 * sum {
                break;
            }
            term = next;
            sum += term;
            k += 1.0;
        }
        sum / x
    } else {
        let mut term = 1.0;
        let mut sum = 0.0;
        let mut n = 1.0;
        loop {
            term *= x / n;
            let contrib = term / n;
            sum += contrib;
            if contrib < 1e-17 * sum {
                break;
            }
            n += 1.0;
        }
        (EULER_GAMMA + x.ln() + sum) * (-x).exp()
    }
}

fn log_principal(z: Complex64) -> Complex64 {
    // Treat a signed-zero imaginary part as the upper side of the cut.
    let arg = if z.im == 0.0 && z.re < 0.0 {
        std::f64::consts::PI
    } else {
        z.im.atan2(z.re)
    };
    Complex64::new(z.norm().ln(), arg)
}

fn e1_series(z: Complex64) -> Complex64 {
    // E1(z) = -gamma - Log z - sum_{n>=1} (-z)^n / (n n!)
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 1..400 {
        let nf = n as f64;
        term *= -z / nf;
        let contrib = term / nf;
        sum += contrib;
        if contrib.norm() <= 1e-17 * sum.norm().max(1e-300) && n > 2 {
            break;
        }
    }
    -EULER_GAMMA - log_principal(z) - sum
}

fn continued_fraction(z: Complex64) -> Complex64 {
    // Modified Lentz evaluation of
    // e^z E1(z) = 1/(z+1- 1/(z+3- 4/(z+5- ...)))
    let tiny = 1e-300;
    let one = Complex64::new(1.0, 0.0);
    let mut b = z + 1.0;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = one / b;
    let mut h = d;
    for i in 1..5000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = one / (d * an + b);
        c = b + an / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        let delta = c * d;
        h *= delta;
        if (delta - one).norm() < 1e-16 {
            break;
        }
    }
    h
}

fn asymptotic(z: Complex64) -> Complex64 {
    let inv = 1.0 / z;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut k = 1.0;
    loop {
        let next = -term * k * inv;
        if next.norm() >= term.norm() || next.norm() < 1e-17 * sum.norm() {
            break;
        }
        term = next;
        sum += term;
        k += 1.0;
    }
    sum * inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm()
    }

    // Reference values: scipy.special.exp1 multiplied by exp(z).
    #[test]
    fn matches_reference_values() {
        let cases = [
            (c(1.0, 0.0), c(0.596_347_362_323_194_6, 0.0)),
            (c(0.1, 0.0), c(2.014_642_544_708_452, 0.0)),
            (
                c(0.0, 1.0),
                c(0.343_377_961_556_427, -0.621_449_624_235_813_4),
            ),
            (
                c(-2.0, 3.0),
                c(-0.089_100_956_958_056_09, -0.278_334_337_853_717_14),
            ),
            (
                c(10.0, 7.0),
                c(0.064_675_675_429_984_6, -0.041_578_589_462_001_284),
            ),
            (
                c(-7.0, 1.5),
                c(-0.159_617_303_737_457_03, -0.044_851_336_695_260_49),
            ),
            (
                c(50.0, -30.0),
                c(0.014_567_224_922_198_982, 0.008_573_673_421_327_07),
            ),
            (
                c(-30.0, 0.5),
                c(-0.034_516_790_237_020_784, -0.000_596_715_049_105_868_1),
            ),
        ];
        for (z, want) in cases {
            let got = exp_e1(z);
            assert!(close(got, want, 1e-12), "z = {z}: got {got}, want {want}");
        }
    }

    // Reference values: mpmath at 30 digits, one point per evaluation branch.
    #[test]
    fn matches_high_precision_on_every_branch() {
        let cases = [
            (
                c(6.381_688_312_295_392, -6.346_184_230_284_557),
                c(0.077_461_081_859_154_3, 0.067_806_803_175_349_23),
            ),
            (c(4.9, 0.0), c(0.173_433_016_244_546_35, 0.0)),
        ];
        for (z, want) in cases {
            let got = exp_e1(z);
            assert!(close(got, want, 2e-12), "z = {z}: got {got}, want {want}");
        }
    }

    #[test]
    fn continued_fraction_and_asymptotic_agree() {
        for k in 0..24 {
            let phi = -2.0 + 4.0 * k as f64 / 23.0;
            let z = Complex64::from_polar(45.0, phi);
            assert!(close(asymptotic(z), continued_fraction(z), 1e-12));
        }
    }

    #[test]
    fn real_ei_reference() {
        // scipy.special.expi(x) * exp(-x)
        let cases = [
            (0.5, 0.275_498_298_551_270_2),
            (1.0, 0.697_174_883_235_066_2),
            (10.0, 0.113_147_020_473_410_76),
            (39.0, 0.026_335_103_935_588_407),
            (60.0, 0.016_954_200_394_813_285),
        ];
        for (x, want) in cases {
            let got = exp_neg_ei(x);
            assert!(
                (got - want).abs() <= 1e-12 * want.abs(),
                "x = {x}: {got} vs {want}"
            );
        }
    }
}
