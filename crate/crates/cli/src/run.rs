//! Runners for the `coeffs`, `evolve`, `coupled` and `asymptotics`
//! subcommands and the shared helpers they use.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use selfosc_core::dynamics::{
    antiphase_metric, delta_dissipation, detect_stationarity, dissipation_energy, estimate_period,
    evolve_coupled, evolve_single, evolve_single_second_order, CoupledInit, Trajectory,
};
use selfosc_core::model::{equilibrium_occupation, mixing_fraction, StatisticsMode, SystemSpec};
use selfosc_core::transport::{
    asymptotic_bath_integral, asymptotic_occupation, coefficients, markovian_asymptote,
    stationarity_condition_residual, CoefficientSeries, KernelConfig, TimeGrid,
};

use crate::config::RunConfig;
use crate::output::{self, Observable, ResultBundle, Status};
use crate::RunError;

/// Default tolerance of the stationarity test.
pub const STATIONARITY_TOL: f64 = 0.01;
/// Agreement required between the first- and second-order equations.
pub const ORDER_EQUIVALENCE_TOL: f64 = 1e-6;
/// Agreement required between a beta = 0 coupled run and independent runs.
pub const DECOUPLING_TOL: f64 = 1e-8;

type CacheCell = Arc<OnceLock<Result<Arc<CoefficientSeries>, selfosc_core::Error>>>;

/// Shared store of coefficient series keyed by system, grid and kernel
/// settings. Each series is computed once even under concurrent requests.
#[derive(Debug, Default)]
pub struct CoefficientCache {
    map: Mutex<HashMap<String, CacheCell>>,
}

impl CoefficientCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(
        &self,
        spec: &SystemSpec,
        grid: TimeGrid,
        config: &KernelConfig,
    ) -> Result<Arc<CoefficientSeries>, selfosc_core::Error> {
        let key = format!("{spec:?}|{grid:?}|{config:?}");
        let cell = self
            .map
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_default()
            .clone();
        cell.get_or_init(|| coefficients(spec, grid, config).map(Arc::new))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn grid(config: &RunConfig) -> Result<TimeGrid, RunError> {
    Ok(TimeGrid::covering(config.run.t_max, config.run.dt)?)
}

/// Coefficient series of oscillator `which` (0 or 1).
pub fn system_coefficients(
    config: &RunConfig,
    which: usize,
    cache: &CoefficientCache,
) -> Result<Arc<CoefficientSeries>, RunError> {
    let spec = config.system_spec(which)?;
    Ok(cache.get(&spec, grid(config)?, &config.kernel_config())?)
}

/// `[t_max / 2, t_max]`, the default late-time window.
pub fn late_window(config: &RunConfig) -> (f64, f64) {
    (0.5 * config.run.t_max, config.run.t_max)
}

/// Times and values of D/lambda where it is defined.
pub fn ratio_series(c: &CoefficientSeries) -> (Vec<f64>, Vec<f64>) {
    c.time
        .iter()
        .zip(&c.ratio)
        .filter_map(|(t, r)| r.map(|r| (*t, r)))
        .unzip()
}

/// Variation of `series` over `window`; passes when the series is
/// non-stationary (variation above `tol`).
pub fn nonstationary_observable(
    name: &str,
    time: &[f64],
    series: &[f64],
    window: (f64, f64),
    tol: f64,
) -> Observable {
    match detect_stationarity(time, series, window, tol) {
        Ok(s) => Observable::check(name, s.variation, tol, !s.stationary).with_window(window),
        Err(_) => Observable::undefined(name).with_window(window),
    }
}

/// Period of `series` over `window`; checked against `expected` with
/// relative tolerance `tol` when given.
pub fn period_observable(
    name: &str,
    time: &[f64],
    series: &[f64],
    window: (f64, f64),
    expected: Option<(f64, f64)>,
) -> Observable {
    match estimate_period(time, series, window) {
        Ok(p) => match expected {
            Some((target, tol)) => Observable::check(
                name,
                p.period,
                tol,
                (p.period - target).abs() <= tol * target,
            )
            .with_window(window),
            None => Observable::info(name, p.period).with_window(window),
        },
        Err(_) => Observable::undefined(name).with_window(window),
    }
}

pub fn max_abs_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Consistent initial slope of the second-order equation.
fn consistent_slope(c: &CoefficientSeries, n0: f64) -> f64 {
    -2.0 * c.lambda[0] * n0 + 2.0 * c.diffusion[0]
}

/// Maximum deviation between the first- and second-order single-oscillator
/// equations over the whole series.
pub fn order_equivalence(
    c: &CoefficientSeries,
    n0: f64,
    t_max: f64,
) -> Result<(Trajectory, f64), RunError> {
    let first = evolve_single(c, n0, t_max)?;
    let second = evolve_single_second_order(c, n0, consistent_slope(c, n0), t_max)?;
    let dev = max_abs_difference(&first.n[0], &second.n[0]);
    Ok((first, dev))
}

pub fn order_observable(name: &str, deviation: f64) -> Observable {
    Observable::check(
        name,
        deviation,
        ORDER_EQUIVALENCE_TOL,
        deviation <= ORDER_EQUIVALENCE_TOL,
    )
}

fn coefficient_observables(
    bundle: &mut ResultBundle,
    suffix: &str,
    c: &CoefficientSeries,
    window: (f64, f64),
) {
    let last = c.len() - 1;
    bundle.observables.push(Observable::info(
        format!("lambda_final{suffix}"),
        c.lambda[last],
    ));
    bundle.observables.push(Observable::info(
        format!("D_final{suffix}"),
        c.diffusion[last],
    ));
    let (t, r) = ratio_series(c);
    bundle.observables.push(
        nonstationary_observable(
            &format!("ratio_variation{suffix}"),
            &t,
            &r,
            window,
            STATIONARITY_TOL,
        )
        .with_status(Status::Info),
    );
}

fn suffix(coupled: bool, which: usize) -> String {
    if coupled {
        format!("_{}", which + 1)
    } else {
        String::new()
    }
}

/// Coefficient series of every configured oscillator.
pub fn run_coeffs(
    config: &RunConfig,
    out: &Path,
    cache: &CoefficientCache,
) -> Result<ResultBundle, RunError> {
    let mut bundle = ResultBundle::new(out);
    output::ensure_dir(out)?;
    let systems = if config.is_coupled() { 2 } else { 1 };
    for which in 0..systems {
        let c = system_coefficients(config, which, cache)?;
        let s = suffix(config.is_coupled(), which);
        output::write_coefficients(&mut bundle, &format!("coefficients{s}.csv"), &c)?;
        coefficient_observables(&mut bundle, &s, &c, late_window(config));
    }
    output::write_observables(&mut bundle, "observables.csv")?;
    output::write_metadata(&mut bundle, "coeffs", config, &[])?;
    Ok(bundle)
}

/// Single-oscillator master equation for the first oscillator.
pub fn run_evolve(
    config: &RunConfig,
    out: &Path,
    cache: &CoefficientCache,
) -> Result<ResultBundle, RunError> {
    let mut bundle = ResultBundle::new(out);
    output::ensure_dir(out)?;
    let c = system_coefficients(config, 0, cache)?;
    let (traj, dev) = order_equivalence(&c, config.run.n0[0], config.run.t_max)?;
    output::write_coefficients(&mut bundle, "coefficients.csv", &c)?;
    output::write_trajectory(&mut bundle, "trajectory.csv", &traj)?;
    let window = late_window(config);
    let n = &traj.n[0];
    bundle
        .observables
        .push(Observable::info("n1_final", n[n.len() - 1]));
    bundle
        .observables
        .push(order_observable("order_equivalence", dev));
    bundle
        .observables
        .push(period_observable("period_n1", &traj.time, n, window, None));
    bundle.observables.push(
        nonstationary_observable("n1_variation", &traj.time, n, window, STATIONARITY_TOL)
            .with_status(Status::Info),
    );
    coefficient_observables(&mut bundle, "", &c, window);
    output::write_observables(&mut bundle, "observables.csv")?;
    output::write_metadata(&mut bundle, "evolve", config, &[])?;
    Ok(bundle)
}

/// Everything a coupled run produces, kept in memory for callers.
pub struct CoupledRun {
    pub coefficients: [Arc<CoefficientSeries>; 2],
    pub trajectory: Trajectory,
    pub dissipation: [Vec<f64>; 2],
}

pub fn coupled_init(config: &RunConfig) -> CoupledInit {
    CoupledInit {
        n0: config.run.n0,
        dn0: config.run.dn0,
    }
}

/// Integrates the coupled pair at `config.beta`.
pub fn coupled_run(config: &RunConfig, cache: &CoefficientCache) -> Result<CoupledRun, RunError> {
    let spec = config.coupled_spec()?;
    let c1 = system_coefficients(config, 0, cache)?;
    let c2 = system_coefficients(config, 1, cache)?;
    let trajectory = evolve_coupled(&spec, &c1, &c2, &coupled_init(config), config.run.t_max)?;
    let e1 = dissipation_energy(&trajectory, 0, &c1, spec.systems[0].omega_renormalized())?;
    let e2 = dissipation_energy(&trajectory, 1, &c2, spec.systems[1].omega_renormalized())?;
    Ok(CoupledRun {
        coefficients: [c1, c2],
        trajectory,
        dissipation: [e1, e2],
    })
}

/// Largest deviation between a beta = 0 coupled run and two independent
/// second-order runs.
pub fn decoupling_deviation(config: &RunConfig, cache: &CoefficientCache) -> Result<f64, RunError> {
    let mut zero = config.clone();
    zero.beta = 0.0;
    let run = coupled_run(&zero, cache)?;
    let mut dev: f64 = 0.0;
    for which in 0..2 {
        let c = &run.coefficients[which];
        let single = evolve_single_second_order(
            c,
            config.run.n0[which],
            config.run.dn0[which],
            config.run.t_max,
        )?;
        dev = dev.max(max_abs_difference(&run.trajectory.n[which], &single.n[0]));
    }
    Ok(dev)
}

pub fn antiphase_observable(
    name: &str,
    traj: &Trajectory,
    window: (f64, f64),
    require: bool,
) -> Observable {
    match antiphase_metric(&traj.time, &traj.n[0], &traj.n[1], window) {
        Ok(r) => {
            let o = Observable::check(name, r, -0.5, r < -0.5).with_window(window);
            if require {
                o
            } else {
                o.with_status(Status::Info)
            }
        }
        Err(_) => Observable::undefined(name).with_window(window),
    }
}

/// Two coupled oscillators at `config.beta`.
pub fn run_coupled(
    config: &RunConfig,
    out: &Path,
    cache: &CoefficientCache,
) -> Result<ResultBundle, RunError> {
    if !config.is_coupled() {
        return Err(crate::config::ConfigError::Invalid {
            key: "oscillator2".into(),
            message: "the coupled command needs a second oscillator ([oscillator2], [bath2.1], [bath2.2])".into(),
        }
        .into());
    }
    let mut bundle = ResultBundle::new(out);
    output::ensure_dir(out)?;
    let run = coupled_run(config, cache)?;
    output::write_coefficients(&mut bundle, "coefficients_1.csv", &run.coefficients[0])?;
    output::write_coefficients(&mut bundle, "coefficients_2.csv", &run.coefficients[1])?;
    output::write_trajectory(&mut bundle, "trajectory.csv", &run.trajectory)?;
    output::write_dissipation(
        &mut bundle,
        "dissipation.csv",
        &run.trajectory.time,
        [&run.dissipation[0], &run.dissipation[1]],
    )?;
    let window = late_window(config);
    let traj = &run.trajectory;
    for c in 0..2 {
        let n = &traj.n[c];
        bundle.observables.push(Observable::info(
            format!("n{}_final", c + 1),
            n[n.len() - 1],
        ));
        bundle.observables.push(Observable::info(
            format!("E{}_final", c + 1),
            run.dissipation[c][n.len() - 1],
        ));
    }
    bundle.observables.push(antiphase_observable(
        "antiphase_correlation",
        traj,
        window,
        false,
    ));
    let mut extra = Vec::new();
    if config.beta > 0.0 {
        let spec = config.coupled_spec()?;
        let d = delta_dissipation(
            &spec,
            [&run.coefficients[0], &run.coefficients[1]],
            &coupled_init(config),
            config.run.t_max,
        )?;
        output::write_delta_dissipation(&mut bundle, "delta_dissipation.csv", &d)?;
        bundle
            .observables
            .push(Observable::info("mean_abs_rate_1", d.mean_abs_rate[0]));
        bundle
            .observables
            .push(Observable::info("mean_abs_rate_2", d.mean_abs_rate[1]));
        extra.push(("rate_window", format!("{}", d.window)));
    } else {
        let dev = decoupling_deviation(config, cache)?;
        bundle.observables.push(Observable::check(
            "decoupling",
            dev,
            DECOUPLING_TOL,
            dev <= DECOUPLING_TOL,
        ));
    }
    output::write_observables(&mut bundle, "observables.csv")?;
    output::write_metadata(&mut bundle, "coupled", config, &extra)?;
    Ok(bundle)
}

/// Large-time limits of every configured oscillator.
pub fn asymptotic_observables(
    spec: &SystemSpec,
    suffix: &str,
    config: &RunConfig,
) -> Result<Vec<Observable>, RunError> {
    let opts = config.kernel_config().integral;
    let mut obs = Vec::new();
    if spec.is_decoupled() {
        obs.push(Observable::undefined(format!(
            "asymptotic_occupation{suffix}"
        )));
        return Ok(obs);
    }
    let [b1, b2] = spec.baths;
    match spec.mode() {
        StatisticsMode::Mixed => {
            let p = mixing_fraction(&b1, &b2)?;
            obs.push(Observable::info(format!("mixing_fraction{suffix}"), p));
            obs.push(Observable::info(
                format!("I_f1_inf{suffix}"),
                asymptotic_bath_integral(spec, 0, &opts)?,
            ));
            obs.push(Observable::info(
                format!("I_b2_inf{suffix}"),
                asymptotic_bath_integral(spec, 1, &opts)?,
            ));
            match stationarity_condition_residual(spec, &opts) {
                Ok(r) => obs.push(Observable::info(
                    format!("stationarity_residual{suffix}"),
                    r,
                )),
                Err(_) => obs.push(Observable::undefined(format!(
                    "stationarity_residual{suffix}"
                ))),
            }
        }
        _ => {
            obs.push(Observable::info(
                format!("I1_inf{suffix}"),
                asymptotic_bath_integral(spec, 0, &opts)?,
            ));
            obs.push(Observable::info(
                format!("I2_inf{suffix}"),
                asymptotic_bath_integral(spec, 1, &opts)?,
            ));
            obs.push(Observable::info(
                format!("asymptotic_occupation{suffix}"),
                asymptotic_occupation(spec, &opts)?,
            ));
            obs.push(Observable::info(
                format!("markovian_asymptote{suffix}"),
                markovian_asymptote(spec)?,
            ));
            if b1.temperature == b2.temperature && b1.statistics == b2.statistics {
                let eq = equilibrium_occupation(spec.omega(), b1.temperature, b1.statistics)?;
                obs.push(Observable::info(
                    format!("equilibrium_occupation{suffix}"),
                    eq,
                ));
            }
        }
    }
    Ok(obs)
}

pub fn run_asymptotics(config: &RunConfig, out: &Path) -> Result<ResultBundle, RunError> {
    let mut bundle = ResultBundle::new(out);
    output::ensure_dir(out)?;
    let systems = if config.is_coupled() { 2 } else { 1 };
    for which in 0..systems {
        let spec = config.system_spec(which)?;
        let s = suffix(config.is_coupled(), which);
        bundle
            .observables
            .push(Observable::info(format!("omega_bare{s}"), spec.omega()));
        bundle
            .observables
            .extend(asymptotic_observables(&spec, &s, config)?);
    }
    output::write_observables(&mut bundle, "asymptotics.csv")?;
    output::write_metadata(&mut bundle, "asymptotics", config, &[])?;
    Ok(bundle)
}

/// Period 2 pi / Omega of an oscillator with renormalized frequency Omega.
pub fn natural_period(omega: f64) -> f64 {
    2.0 * PI / omega
}
