//! Panel-adaptive Gauss-Kronrod (7/15) quadrature for vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Controls for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Relative tolerance on each component.
    pub rtol: f64,
    /// Absolute tolerance floor on each component.
    pub atol: f64,
    /// Width of the initial uniform panels.
    pub initial_width: f64,
    /// Upper bound on the number of panels before giving up.
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rtol: 1e-8,
            atol: 1e-14,
            initial_width: f64::INFINITY,
            max_panels: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    /// Integral of |f| per component.
    pub abs_value: [f64; N],
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    abs_value: [f64; N],
}

struct Ranked<const N: usize> {
    priority: f64,
    panel: Panel<N>,
}

impl<const N: usize> PartialEq for Ranked<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Ranked<N> {}
impl<const N: usize> PartialOrd for Ranked<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Ranked<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.panel.a.total_cmp(&self.panel.a))
    }
}

fn gauss_kronrod<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> Panel<N> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut absk = [0.0; N];
    let mut samples = [[0.0; N]; 15];
    for i in 0..N {
        kron[i] = WGK[7] * fc[i];
        gauss[i] = WG[3] * fc[i];
        absk[i] = WGK[7] * fc[i].abs();
    }
    samples[14] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        for i in 0..N {
            kron[i] += WGK[j] * (f1[i] + f2[i]);
            absk[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
        samples[2 * j] = f1;
        samples[2 * j + 1] = f2;
    }
    let mut error = [0.0; N];
    let mut value = [0.0; N];
    let mut abs_value = [0.0; N];
    for i in 0..N {
        let mean = 0.5 * kron[i];
        let mut asc = WGK[7] * (fc[i] - mean).abs();
        for j in 0..7 {
            asc +=
                WGK[j] * ((samples[2 * j][i] - mean).abs() + (samples[2 * j + 1][i] - mean).abs());
        }
        let asc = asc * half.abs();
        let mut err = ((kron[i] - gauss[i]) * half).abs();
        if asc != 0.0 && err != 0.0 {
            err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
        }
        let resabs = absk[i] * half.abs();
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        value[i] = kron[i] * half;
        error[i] = err;
        abs_value[i] = resabs;
    }
    Panel {
        a,
        b,
        value,
        error,
        abs_value,
    }
}

fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

fn tolerance(opts: &QuadratureOptions, value: f64, abs_value: f64) -> f64 {
    // The floor relative to the integral of |f| keeps strongly cancelling
    // components (time derivatives near their zeros) from stalling.
    opts.atol.max(opts.rtol * value.abs().max(1e-2 * abs_value))
}

/// Integrates the vector-valued `f` over `[a, b]`.
pub fn integrate<const N: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    opts: &QuadratureOptions,
) -> Result<QuadResult<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Domain(format!(
            "invalid integration interval [{a}, {b}]"
        )));
    }
    if b == a {
        return Ok(QuadResult {
            value: [0.0; N],
            error: [0.0; N],
            abs_value: [0.0; N],
            panels: 0,
        });
    }
    let width = if opts.initial_width.is_finite() && opts.initial_width > 0.0 {
        opts.initial_width
    } else {
        b - a
    };
    let initial = (((b - a) / width).ceil() as usize).clamp(1, (opts.max_panels / 2).max(1));

    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    let mut total_abs = [0.0; N];
    let mut heap: BinaryHeap<Ranked<N>> = BinaryHeap::with_capacity(2 * initial);
    let h = (b - a) / initial as f64;
    let mut panels = Vec::with_capacity(initial);
    for k in 0..initial {
        let lo = a + h * k as f64;
        let hi = if k + 1 == initial {
            b
        } else {
            a + h * (k + 1) as f64
        };
        let p = gauss_kronrod(&mut f, lo, hi);
        for i in 0..N {
            total[i] += p.value[i];
            total_err[i] += p.error[i];
            total_abs[i] += p.abs_value[i];
        }
        panels.push(p);
    }
    let priority = |p: &Panel<N>, total: &[f64; N], total_abs: &[f64; N]| -> f64 {
        (0..N)
            .map(|i| p.error[i] / tolerance(opts, total[i], total_abs[i]))
            .fold(0.0, f64::max)
    };
    for p in panels {
        heap.push(Ranked {
            priority: priority(&p, &total, &total_abs),
            panel: p,
        });
    }

    loop {
        let converged = (0..N).all(|i| total_err[i] <= tolerance(opts, total[i], total_abs[i]));
        if converged {
            break;
        }
        if heap.len() >= opts.max_panels {
            let (idx, _) = (0..N)
                .map(|i| (i, total_err[i] / tolerance(opts, total[i], total_abs[i])))
                .fold((0, f64::MIN), |acc, x| if x.1 > acc.1 { x } else { acc });
            return Err(Error::Quadrature {
                estimate: total_err[idx],
                tolerance: tolerance(opts, total[idx], total_abs[idx]),
            });
        }
        let worst = heap.pop().expect("panel heap is never empty").panel;
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // The panel cannot be split further in floating point.
            return Err(Error::Quadrature {
                estimate: total_err.iter().cloned().fold(0.0, f64::max),
                tolerance: opts.rtol,
            });
        }
        let left = gauss_kronrod(&mut f, worst.a, mid);
        let right = gauss_kronrod(&mut f, mid, worst.b);
        for i in 0..N {
            total[i] += left.value[i] + right.value[i] - worst.value[i];
            total_err[i] += left.error[i] + right.error[i] - worst.error[i];
            total_abs[i] += left.abs_value[i] + right.abs_value[i] - worst.abs_value[i];
            if total_err[i] < 0.0 {
                total_err[i] = 0.0;
            }
        }
        heap.push(Ranked {
            priority: priority(&left, &total, &total_abs),
            panel: left,
        });
        heap.push(Ranked {
            priority: priority(&right, &total, &total_abs),
            panel: right,
        });
    }

    // Deterministic final reduction: panels ordered by position, summed pairwise.
    let mut all: Vec<Panel<N>> = heap.into_iter().map(|r| r.panel).collect();
    all.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut abs_value = [0.0; N];
    let mut scratch = vec![0.0; all.len()];
    for i in 0..N {
        for (s, p) in scratch.iter_mut().zip(&all) {
            *s = p.value[i];
        }
        value[i] = pairwise_sum(&scratch);
        for (s, p) in scratch.iter_mut().zip(&all) {
            *s = p.error[i];
        }
        error[i] = pairwise_sum(&scratch);
        for (s, p) in scratch.iter_mut().zip(&all) {
            *s = p.abs_value[i];
        }
        abs_value[i] = pairwise_sum(&scratch);
    }
    Ok(QuadResult {
        value,
        error,
        abs_value,
        panels: all.len(),
    })
}

/// Integrates over `[a, inf)` through the substitution `w = a + x/(1-x)`.
pub fn integrate_semi_infinite<const N: usize, F>(
    mut f: F,
    a: f64,
    opts: &QuadratureOptions,
) -> Result<QuadResult<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let mapped = |x: f64| -> [f64; N] {
        let one_minus = 1.0 - x;
        if one_minus <= 0.0 {
            return [0.0; N];
        }
        let w = a + x / one_minus;
        let jac = 1.0 / (one_minus * one_minus);
        let mut v = f(w);
        for e in v.iter_mut() {
            *e *= jac;
            if !e.is_finite() {
                *e = 0.0;
            }
        }
        v
    };
    let mapped_opts = QuadratureOptions {
        initial_width: 1.0 / 32.0,
        ..*opts
    };
    integrate(mapped, 0.0, 1.0, &mapped_opts)
}

/// Integrates `[a, cutoff]` and then keeps appending pieces of doubling
/// length until the last appended piece contributes less than `rtol/10` of
/// the running total in every component.
pub fn integrate_until_negligible<const N: usize, F>(
    mut f: F,
    a: f64,
    cutoff: f64,
    opts: &QuadratureOptions,
    max_extensions: usize,
) -> Result<QuadResult<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    let mut result = integrate(&mut f, a, cutoff, opts)?;
    let mut chunk = cutoff - a;
    let mut lo = cutoff;
    for _ in 0..max_extensions {
        let piece = integrate(&mut f, lo, lo + chunk, opts)?;
        let mut negligible = true;
        for i in 0..N {
            result.value[i] += piece.value[i];
            result.error[i] += piece.error[i];
            result.abs_value[i] += piece.abs_value[i];
            let scale = result.value[i]
                .abs()
                .max(1e-2 * result.abs_value[i])
                .max(opts.atol);
            if piece.value[i].abs() > 0.1 * opts.rtol * scale {
                negligible = false;
            }
        }
        result.panels += piece.panels;
        lo += chunk;
        chunk *= 2.0;
        if negligible {
            return Ok(result);
        }
    }
    Err(Error::Quadrature {
        estimate: f64::NAN,
        tolerance: opts.rtol,
    })
}
