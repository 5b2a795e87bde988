//! Validation harness: the exact oracle comparison plus an invariant suite.

use std::path::Path;
use std::str::FromStr;

use selfosc_core::dynamics::evolve_single;
use selfosc_core::model::{Statistics, StatisticsMode, SystemSpec};
use selfosc_core::oracle::{compare, evolve_exact, sample_bath, ExactOptions};
use selfosc_core::transport::{characteristic_roots, CoefficientSeries, TimeGrid};

use crate::config::RunConfig;
use crate::output::{self, Observable, ResultBundle, Status};
use crate::run::{order_equivalence, order_observable, CoefficientCache};
use crate::RunError;

/// Largest |lambda(0)|, |D(0)|, |I(0)| accepted.
pub const ZERO_TOL: f64 = 1e-8;
/// Largest relative root residual accepted.
pub const ROOT_TOL: f64 = 1e-9;
/// Largest relative violation of D = D^(1) + D^(2) accepted.
pub const ADDITIVITY_TOL: f64 = 1e-10;
/// Largest relative violation of the mixed combination formula accepted.
pub const COMBINATION_TOL: f64 = 1e-10;

/// Deliberate corruption used to check that validation can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flips the sign of lambda(t) before the master equation is integrated.
    LambdaSignFlip,
}

impl FromStr for Fault {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lambda-sign" => Ok(Fault::LambdaSignFlip),
            other => Err(format!("unknown fault '{other}' (expected lambda-sign)")),
        }
    }
}

fn relative(value: f64, scale: f64) -> f64 {
    value / scale.max(f64::MIN_POSITIVE)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn invariant_observables(
    spec: &SystemSpec,
    c: &CoefficientSeries,
    n0: f64,
    t_max: f64,
) -> Result<Vec<Observable>, RunError> {
    let mut obs = Vec::new();
    let zero = [
        c.lambda[0],
        c.diffusion[0],
        c.bath_integrals[0][0],
        c.bath_integrals[1][0],
    ]
    .iter()
    .fold(0.0f64, |m, v| m.max(v.abs()));
    obs.push(Observable::check(
        "kernel_zeros_at_t0",
        zero,
        ZERO_TOL,
        zero <= ZERO_TOL,
    ));

    let roots = characteristic_roots(spec)?;
    let scale = roots
        .quartic_coefficients
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = relative(roots.residuals().iter().cloned().fold(0.0, f64::max), scale);
    obs.push(Observable::check(
        "root_residual",
        residual,
        ROOT_TOL,
        residual <= ROOT_TOL,
    ));

    let additivity = (0..c.len())
        .map(|k| (c.diffusion[k] - c.partial_diffusion[0][k] - c.partial_diffusion[1][k]).abs())
        .fold(0.0, f64::max);
    let additivity = relative(additivity, max_abs(&c.diffusion));
    obs.push(Observable::check(
        "diffusion_additivity",
        additivity,
        ADDITIVITY_TOL,
        additivity <= ADDITIVITY_TOL,
    ));

    if let Some(m) = &c.mixed {
        let p = m.mixing_fraction;
        let violation = (0..c.len())
            .map(|k| {
                let expect = p * m.lambda_fermionic[k] + (1.0 - p) * m.lambda_bosonic[k]
                    - 2.0 * c.partial_diffusion[0][k];
                (c.lambda[k] - expect).abs()
            })
            .fold(0.0, f64::max);
        let violation = relative(violation, max_abs(&c.lambda));
        obs.push(Observable::check(
            "mixed_combination",
            violation,
            COMBINATION_TOL,
            violation <= COMBINATION_TOL,
        ));
    }

    let (traj, dev) = order_equivalence(c, n0, t_max)?;
    obs.push(order_observable("order_equivalence", dev));
    let negative = traj.n[0].iter().cloned().fold(f64::INFINITY, f64::min);
    obs.push(Observable::info("n_min", negative));
    Ok(obs)
}

/// Runs the oracle comparison and the invariant suite for the first
/// oscillator. Mixed systems are validated through their all-bosonic
/// constituent (same frequencies, couplings, cutoffs and temperatures) and
/// the combination formula; all-fermionic systems skip the oracle.
pub fn run_validate(
    config: &RunConfig,
    out: &Path,
    fault: Option<Fault>,
    cache: &CoefficientCache,
) -> Result<ResultBundle, RunError> {
    let mut bundle = ResultBundle::new(out);
    output::ensure_dir(out)?;
    let spec = config.system_spec(0)?;
    let v = config.validate;
    let grid = TimeGrid::covering(v.t_max, config.run.dt)?;
    let kernel = config.kernel_config();
    let n0 = config.run.n0[0];

    let own = cache.get(&spec, grid, &kernel)?;
    bundle
        .observables
        .extend(invariant_observables(&spec, &own, n0, v.t_max)?);

    let oracle_spec = match spec.mode() {
        StatisticsMode::AllBosonic => Some(spec),
        StatisticsMode::Mixed => Some(spec.with_statistics(Statistics::Bosonic)),
        StatisticsMode::AllFermionic => None,
    };
    match oracle_spec {
        None => bundle
            .observables
            .push(Observable::undefined("oracle_max_deviation").with_status(Status::Skipped)),
        Some(os) => {
            let mut master_coeffs = (*cache.get(&os, grid, &kernel)?).clone();
            if fault == Some(Fault::LambdaSignFlip) {
                master_coeffs.lambda.iter_mut().for_each(|l| *l = -*l);
            }
            let master = evolve_single(&master_coeffs, n0, v.t_max)?;
            let b0 = sample_bath(
                &os.baths[0],
                v.modes,
                v.w_max_over_gamma * os.baths[0].gamma,
            )?;
            let b1 = sample_bath(
                &os.baths[1],
                v.modes,
                v.w_max_over_gamma * os.baths[1].gamma,
            )?;
            let opts = ExactOptions {
                output_dt: config.run.dt,
                n0,
                ..ExactOptions::default()
            };
            let exact = evolve_exact(&os, [&b0, &b1], v.t_max, &opts)?;
            let report = compare(&master, 0, &exact)?;
            bundle.observables.push(
                Observable::check(
                    "oracle_max_deviation",
                    report.max_abs_deviation,
                    v.tolerance,
                    report.passes(v.tolerance),
                )
                .with_window(report.window),
            );
            bundle.observables.push(
                Observable::info("oracle_mean_deviation", report.mean_abs_deviation)
                    .with_window(report.window),
            );
            bundle
                .observables
                .push(Observable::info("oracle_t_worst", report.t_worst));
            bundle.observables.push(Observable::check(
                "oracle_recurrence_time",
                exact.recurrence_time,
                v.t_max,
                exact.recurrence_time > v.t_max,
            ));
            bundle
                .observables
                .push(Observable::info("oracle_modes", exact.modes as f64));
            bundle
                .observables
                .push(Observable::info("oracle_step", exact.step));
        }
    }
    output::write_observables(&mut bundle, "validation.csv")?;
    let fault_text = match fault {
        Some(Fault::LambdaSignFlip) => "lambda-sign",
        None => "none",
    };
    output::write_metadata(
        &mut bundle,
        "validate",
        config,
        &[("fault", fault_text.into())],
    )?;
    Ok(bundle)
}
