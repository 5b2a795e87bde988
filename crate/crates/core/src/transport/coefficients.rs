//! Friction and diffusion coefficients on a uniform time grid.

use crate::error::{Error, Result};
use crate::model::{mixing_fraction, StatisticsMode, SystemSpec};
use crate::transport::bath_integral::{
    bath_integral_with_kernel, BathIntegral, BathKernel, IntegralOptions,
};
use crate::transport::kernels::{
    amplitude_weights, shifted_amplitudes, AmplitudeWeights, Amplitudes,
};
use crate::transport::roots::{characteristic_roots, RootSet};

/// Configuration of the coefficient pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Exponent `P` of `|A|^P` in the friction kernel `|A|^P + eps |B|^2`
    /// (1 or 2).
    pub abs_a_power: u8,
    pub integral: IntegralOptions,
    /// `D/lambda` is reported as undefined where `|lambda|` is below this.
    pub ratio_floor: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            abs_a_power: 2,
            integral: IntegralOptions::default(),
            ratio_floor: 1e-6,
        }
    }
}

impl KernelConfig {
    fn check(&self) -> Result<()> {
        if self.abs_a_power != 1 && self.abs_a_power != 2 {
            return Err(Error::Domain(format!(
                "abs_A_power must be 1 or 2, got {}",
                self.abs_a_power
            )));
        }
        if !(self.integral.rtol > 0.0 && self.integral.rtol < 1.0) {
            return Err(Error::Domain(format!(
                "quadrature rtol must lie in (0, 1), got {}",
                self.integral.rtol
            )));
        }
        if !(self.integral.w_max_factor > 0.0) {
            return Err(Error::Domain("w_max_factor must be > 0".into()));
        }
        Ok(())
    }
}

/// Uniform grid `t_k = k dt`, `k = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    /// Smallest uniform grid with step `dt` that covers `[0, t_max]`.
    pub fn covering(t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::Domain(format!(
                "t_max must be finite and > 0, got {t_max}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0 && dt <= t_max) {
            return Err(Error::Domain(format!(
                "dt must lie in (0, t_max], got {dt}"
            )));
        }
        let steps = (t_max / dt - 1e-9).ceil() as usize;
        Ok(TimeGrid { dt, len: steps + 1 })
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.time(k)).collect()
    }
}

/// Per-constituent series of a mixed system.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedComponents {
    pub mixing_fraction: f64,
    pub lambda_fermionic: Vec<f64>,
    pub lambda_bosonic: Vec<f64>,
}

/// Friction, diffusion and intermediate kernels sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSeries {
    pub grid: TimeGrid,
    pub time: Vec<f64>,
    pub lambda: Vec<f64>,
    pub diffusion: Vec<f64>,
    pub partial_diffusion: [Vec<f64>; 2],
    pub bath_integrals: [Vec<f64>; 2],
    pub bath_integral_rates: [Vec<f64>; 2],
    pub bath_integral_errors: [Vec<f64>; 2],
    pub j_parts: [Vec<f64>; 2],
    /// D/lambda where |lambda| >= ratio_floor.
    pub ratio: Vec<Option<f64>>,
    pub ratio_floor: f64,
    pub omega_renormalized: f64,
    pub mixed: Option<MixedComponents>,
}

impl CoefficientSeries {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.grid.dt
    }

    pub fn t_max(&self) -> f64 {
        self.grid.t_max()
    }

    /// Zero coefficients on `grid`; used for null dynamics and tests.
    pub fn constant(grid: TimeGrid, lambda: f64, diffusion: f64, omega_renormalized: f64) -> Self {
        let n = grid.len;
        let ratio = if lambda.abs() >= 1e-6 {
            Some(diffusion / lambda)
        } else {
            None
        };
        CoefficientSeries {
            grid,
            time: grid.times(),
            lambda: vec![lambda; n],
            diffusion: vec![diffusion; n],
            partial_diffusion: [vec![diffusion; n], vec![0.0; n]],
            bath_integrals: [vec![0.0; n], vec![0.0; n]],
            bath_integral_rates: [vec![0.0; n], vec![0.0; n]],
            bath_integral_errors: [vec![0.0; n], vec![0.0; n]],
            j_parts: [vec![0.0; n], vec![0.0; n]],
            ratio: vec![ratio; n],
            ratio_floor: 1e-6,
            omega_renormalized,
            mixed: None,
        }
    }
}

/// Values of all kernels needed at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientPoint {
    pub lambda: f64,
    pub partial_diffusion: [f64; 2],
    pub bath: [BathIntegral; 2],
    pub j: [f64; 2],
    pub j_rate: [f64; 2],
}

/// Precomputed, time-independent context for one system.
#[derive(Debug, Clone)]
pub struct CoefficientContext {
    spec: SystemSpec,
    roots: RootSet,
    weights: AmplitudeWeights,
    kernels: [BathKernel; 2],
    shift: f64,
    config: KernelConfig,
}

impl CoefficientContext {
    pub fn new(spec: &SystemSpec, config: &KernelConfig) -> Result<Self> {
        config.check()?;
        let roots = characteristic_roots(spec)?;
        Self::with_roots(spec, roots, config)
    }

    pub fn with_roots(spec: &SystemSpec, roots: RootSet, config: &KernelConfig) -> Result<Self> {
        config.check()?;
        let weights = amplitude_weights(&roots, spec);
        let kernels = [
            BathKernel::new(&roots, spec, 0)?,
            BathKernel::new(&roots, spec, 1)?,
        ];
        let shift = if spec.is_decoupled() {
            0.0
        } else {
            roots.max_real_part()
        };
        Ok(CoefficientContext {
            spec: *spec,
            roots,
            weights,
            kernels,
            shift,
            config: *config,
        })
    }

    pub fn roots(&self) -> &RootSet {
        &self.roots
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    fn amplitudes(&self, t: f64) -> Amplitudes {
        shifted_amplitudes(&self.roots, &self.spec, &self.weights, t, self.shift)
    }

    /// lambda = -(1/2) d/dt ln(|A|^P + eps |B|^2) evaluated with amplitudes
    /// scaled by `exp(-shift t)`.
    fn friction(&self, amp: &Amplitudes, t: f64, eps: f64) -> Result<f64> {
        let a_abs = amp.a.norm();
        let b_sq = amp.b.norm_sqr();
        let b_rate = 2.0 * (amp.b.conj() * amp.db).re;
        let a_re = (amp.a.conj() * amp.da).re;
        let (x, dx, envelope) = if self.config.abs_a_power == 2 {
            (
                a_abs * a_abs + eps * b_sq,
                2.0 * a_re + eps * b_rate,
                a_abs * a_abs + b_sq,
            )
        } else {
            let g = (self.shift * t).exp();
            if a_abs == 0.0 {
                return Err(Error::SingularKernel { t });
            }
            (
                a_abs + eps * g * b_sq,
                a_re / a_abs + eps * g * b_rate,
                a_abs + g * b_sq,
            )
        };
        if !(x.abs() >= 1e-12 * envelope) || x == 0.0 {
            return Err(Error::SingularKernel { t });
        }
        Ok(-0.5 * dx / x)
    }

    /// Friction coefficient of the same-statistics system with sign `eps`.
    pub fn friction_at(&self, t: f64, eps: f64) -> Result<f64> {
        let amp = self.amplitudes(t);
        self.friction(&amp, t, eps)
    }

    fn j_terms(&self, amp: &Amplitudes, t: f64) -> ([f64; 2], [f64; 2]) {
        let g = (self.shift * t).exp();
        let b = [amp.b_parts[0] * g, amp.b_parts[1] * g];
        let db = [amp.db_parts[0] * g, amp.db_parts[1] * g];
        let cross = (b[0] * b[1].conj()).re;
        let cross_rate = (db[0] * b[1].conj() + b[0] * db[1].conj()).re;
        let mut j = [0.0; 2];
        let mut dj = [0.0; 2];
        for l in 0..2 {
            j[l] = b[l].norm_sqr() + cross;
            dj[l] = 2.0 * (b[l].conj() * db[l]).re + cross_rate;
        }
        (j, dj)
    }

    fn integral(&self, bath: usize, t: f64) -> Result<BathIntegral> {
        bath_integral_with_kernel(&self.kernels[bath], t, &self.config.integral)
    }

    /// All kernels of a same-statistics system at time `t`.
    pub fn same_statistics_point(&self, t: f64) -> Result<CoefficientPoint> {
        let eps = match self.spec.common_statistics() {
            Some(s) => s.sign(),
            None => {
                return Err(Error::Domain(
                    "same-statistics coefficients need both baths of one statistics".into(),
                ))
            }
        };
        let amp = self.amplitudes(t);
        let lambda = self.friction(&amp, t, eps)?;
        let (j, j_rate) = self.j_terms(&amp, t);
        let bath = [self.integral(0, t)?, self.integral(1, t)?];
        let mut partial = [0.0; 2];
        for l in 0..2 {
            partial[l] = lambda * (j[l] + bath[l].value) + 0.5 * (j_rate[l] + bath[l].derivative);
        }
        Ok(CoefficientPoint {
            lambda,
            partial_diffusion: partial,
            bath,
            j,
            j_rate,
        })
    }

    /// Mixed system at time `t`: returns the combined point together with
    /// the constituent frictions `(lambda_f, lambda_b)`.
    pub fn mixed_point(&self, t: f64, p: f64) -> Result<(CoefficientPoint, f64, f64)> {
        let amp = self.amplitudes(t);
        let lambda_f = self.friction(&amp, t, -1.0)?;
        let lambda_b = self.friction(&amp, t, 1.0)?;
        let (j, j_rate) = self.j_terms(&amp, t);
        // Bath 1 is fermionic and bath 2 bosonic, so each integral already
        // carries the statistics of its auxiliary system.
        let bath = [self.integral(0, t)?, self.integral(1, t)?];
        let d_f1 = lambda_f * (j[0] + bath[0].value) + 0.5 * (j_rate[0] + bath[0].derivative);
        let d_b2 = lambda_b * (j[1] + bath[1].value) + 0.5 * (j_rate[1] + bath[1].derivative);
        let lambda = p * lambda_f + (1.0 - p) * lambda_b - 2.0 * d_f1;
        Ok((
            CoefficientPoint {
                lambda,
                partial_diffusion: [d_f1, d_b2],
                bath,
                j,
                j_rate,
            },
            lambda_f,
            lambda_b,
        ))
    }
}

fn empty_series(spec: &SystemSpec, grid: TimeGrid, config: &KernelConfig) -> CoefficientSeries {
    let n = grid.len;
    CoefficientSeries {
        grid,
        time: grid.times(),
        lambda: Vec::with_capacity(n),
        diffusion: Vec::with_capacity(n),
        partial_diffusion: [Vec::with_capacity(n), Vec::with_capacity(n)],
        bath_integrals: [Vec::with_capacity(n), Vec::with_capacity(n)],
        bath_integral_rates: [Vec::with_capacity(n), Vec::with_capacity(n)],
        bath_integral_errors: [Vec::with_capacity(n), Vec::with_capacity(n)],
        j_parts: [Vec::with_capacity(n), Vec::with_capacity(n)],
        ratio: Vec::with_capacity(n),
        ratio_floor: config.ratio_floor,
        omega_renormalized: spec.omega_renormalized(),
        mixed: None,
    }
}

fn push_point(series: &mut CoefficientSeries, point: &CoefficientPoint, t: f64) -> Result<()> {
    let d = point.partial_diffusion[0] + point.partial_diffusion[1];
    if !point.lambda.is_finite() || !d.is_finite() {
        return Err(Error::NonFinite { t });
    }
    series.lambda.push(point.lambda);
    series.diffusion.push(d);
    for l in 0..2 {
        series.partial_diffusion[l].push(point.partial_diffusion[l]);
        series.bath_integrals[l].push(point.bath[l].value);
        series.bath_integral_rates[l].push(point.bath[l].derivative);
        series.bath_integral_errors[l].push(point.bath[l].error);
        series.j_parts[l].push(point.j[l]);
    }
    let ratio = if point.lambda.abs() >= series.ratio_floor {
        Some(d / point.lambda)
    } else {
        None
    };
    series.ratio.push(ratio);
    Ok(())
}

/// Coefficients of a system whose two baths share one statistics.
pub fn same_statistics_coefficients(
    spec: &SystemSpec,
    grid: TimeGrid,
    config: &KernelConfig,
) -> Result<CoefficientSeries> {
    if spec.common_statistics().is_none() {
        return Err(Error::Domain(
            "same_statistics_coefficients requires both baths of one statistics".into(),
        ));
    }
    let ctx = CoefficientContext::new(spec, config)?;
    let mut series = empty_series(spec, grid, config);
    for k in 0..grid.len {
        let t = grid.time(k);
        let point = ctx.same_statistics_point(t)?;
        push_point(&mut series, &point, t)?;
    }
    Ok(series)
}

/// Coefficients of a mixed system (bath 1 fermionic, bath 2 bosonic):
/// lambda_1 = p lambda_f + (1-p) lambda_b - 2 D_f^(1), D_1 = D_f^(1) + D_b^(2).
pub fn mixed_coefficients(
    spec: &SystemSpec,
    grid: TimeGrid,
    config: &KernelConfig,
) -> Result<CoefficientSeries> {
    if spec.mode() != StatisticsMode::Mixed {
        return Err(Error::Domain(
            "mixed_coefficients requires a fermionic bath 1 and a bosonic bath 2".into(),
        ));
    }
    let p = mixing_fraction(&spec.baths[0], &spec.baths[1])?;
    let ctx = CoefficientContext::new(spec, config)?;
    let mut series = empty_series(spec, grid, config);
    let mut lf = Vec::with_capacity(grid.len);
    let mut lb = Vec::with_capacity(grid.len);
    for k in 0..grid.len {
        let t = grid.time(k);
        let (point, lambda_f, lambda_b) = ctx.mixed_point(t, p)?;
        push_point(&mut series, &point, t)?;
        lf.push(lambda_f);
        lb.push(lambda_b);
    }
    series.mixed = Some(MixedComponents {
        mixing_fraction: p,
        lambda_fermionic: lf,
        lambda_bosonic: lb,
    });
    Ok(series)
}

/// Dispatches on the statistics mode.
pub fn coefficients(
    spec: &SystemSpec,
    grid: TimeGrid,
    config: &KernelConfig,
) -> Result<CoefficientSeries> {
    match spec.mode() {
        StatisticsMode::Mixed => mixed_coefficients(spec, grid, config),
        _ => same_statistics_coefficients(spec, grid, config),
    }
}
