//! Preset scenarios: each writes plot-ready CSV files and an observables
//! file whose checks encode the qualitative behaviour of the preset.

use std::path::Path;

use selfosc_core::dynamics::delta_dissipation;

use crate::config::{RunConfig, ScenarioName, BETA_FAMILY};
use crate::output::{self, Observable, ResultBundle};
use crate::run::{
    antiphase_observable, coupled_init, coupled_run, decoupling_deviation, natural_period,
    nonstationary_observable, order_equivalence, order_observable, period_observable, ratio_series,
    system_coefficients, CoefficientCache, DECOUPLING_TOL, STATIONARITY_TOL,
};
use crate::RunError;

/// Window over which the late-time ratio D/lambda is tested.
pub const RATIO_WINDOW: (f64, f64) = (10.0, 20.0);
/// Window of the single-oscillator period check.
pub const PERIOD_WINDOW: (f64, f64) = (3.0, 8.0);
/// Relative tolerance of the period check.
pub const PERIOD_TOL: f64 = 0.05;
/// Window of the anti-phase check.
pub const ANTIPHASE_WINDOW: (f64, f64) = (7.0, 17.0);
/// Couplings for which anti-phase locking is required inside the window
/// (fig4 only; fig6 reports the correlation without a requirement).
pub const ANTIPHASE_BETAS: [f64; 2] = [0.1, 0.6];
/// Dissipation ordering is checked from this time on.
pub const DISSIPATION_ORDER_FROM: f64 = 2.0;

/// Name of the per-coupling output directory.
pub fn beta_dir(beta: f64) -> String {
    format!("beta_{beta}")
}

/// Least-squares slope of `y` against `t`.
pub fn trend(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in t.iter().zip(y) {
        num += (a - mt) * (b - my);
        den += (a - mt) * (a - mt);
    }
    num / den
}

/// Runs preset `name` with `config` (the preset, possibly overridden).
pub fn run_scenario(
    name: ScenarioName,
    config: &RunConfig,
    out: &Path,
    cache: &CoefficientCache,
) -> Result<ResultBundle, RunError> {
    let mut bundle = ResultBundle::new(out);
    output::ensure_dir(out)?;
    let mut extra = vec![("scenario", name.to_string())];
    match name {
        ScenarioName::Fig1 | ScenarioName::Fig2 => single(name, config, &mut bundle, cache)?,
        ScenarioName::Fig3 | ScenarioName::Fig5 => coefficients_pair(config, &mut bundle, cache)?,
        ScenarioName::Fig4 | ScenarioName::Fig6 => {
            occupation_family(name, config, &mut bundle, cache)?
        }
        ScenarioName::Fig7 => dissipation_family(config, &mut bundle, cache)?,
        ScenarioName::Fig8 => {
            extra.push(("rate_window", delta_family(config, &mut bundle, cache)?))
        }
    }
    if name.is_coupled() {
        extra.push(("beta_family", format!("{BETA_FAMILY:?}")));
        for which in 0..2 {
            let c = system_coefficients(config, which, cache)?;
            let (_, dev) = order_equivalence(&c, config.run.n0[which], config.run.t_max)?;
            bundle.observables.push(order_observable(
                &format!("order_equivalence_{}", which + 1),
                dev,
            ));
        }
    }
    output::write_observables(&mut bundle, "observables.csv")?;
    output::write_metadata(&mut bundle, &format!("scenario {name}"), config, &extra)?;
    Ok(bundle)
}

fn single(
    name: ScenarioName,
    config: &RunConfig,
    bundle: &mut ResultBundle,
    cache: &CoefficientCache,
) -> Result<(), RunError> {
    let c = system_coefficients(config, 0, cache)?;
    output::write_coefficients(bundle, "coefficients.csv", &c)?;
    let (t, r) = ratio_series(&c);
    bundle.observables.push(nonstationary_observable(
        "ratio_nonstationary",
        &t,
        &r,
        RATIO_WINDOW,
        STATIONARITY_TOL,
    ));
    let spec = config.system_spec(0)?;
    bundle
        .observables
        .extend(crate::run::asymptotic_observables(&spec, "", config)?);
    let (traj, dev) = order_equivalence(&c, config.run.n0[0], config.run.t_max)?;
    bundle
        .observables
        .push(order_observable("order_equivalence", dev));
    if name == ScenarioName::Fig2 {
        output::write_trajectory(bundle, "trajectory.csv", &traj)?;
        let target = natural_period(spec.omega_renormalized());
        bundle
            .observables
            .push(Observable::info("expected_period", target));
        bundle.observables.push(period_observable(
            "period_n1",
            &traj.time,
            &traj.n[0],
            PERIOD_WINDOW,
            Some((target, PERIOD_TOL)),
        ));
        bundle.observables.push(nonstationary_observable(
            "n1_nonstationary",
            &traj.time,
            &traj.n[0],
            RATIO_WINDOW,
            STATIONARITY_TOL,
        ));
    }
    Ok(())
}

fn coefficients_pair(
    config: &RunConfig,
    bundle: &mut ResultBundle,
    cache: &CoefficientCache,
) -> Result<(), RunError> {
    let window = (0.5 * config.run.t_max, config.run.t_max);
    for which in 0..2 {
        let c = system_coefficients(config, which, cache)?;
        output::write_coefficients(bundle, &format!("coefficients_{}.csv", which + 1), &c)?;
        let s = which + 1;
        bundle.observables.push(period_observable(
            &format!("period_lambda_{s}"),
            &c.time,
            &c.lambda,
            window,
            None,
        ));
        bundle.observables.push(period_observable(
            &format!("period_D_{s}"),
            &c.time,
            &c.diffusion,
            window,
            None,
        ));
    }
    Ok(())
}

fn family_config(config: &RunConfig, beta: f64) -> RunConfig {
    let mut c = config.clone();
    c.beta = beta;
    c
}

fn occupation_family(
    name: ScenarioName,
    config: &RunConfig,
    bundle: &mut ResultBundle,
    cache: &CoefficientCache,
) -> Result<(), RunError> {
    coefficient_files(config, bundle, cache)?;
    for beta in BETA_FAMILY {
        let run = coupled_run(&family_config(config, beta), cache)?;
        let mut sub = ResultBundle::new(&bundle.dir.join(beta_dir(beta)));
        output::write_trajectory(&mut sub, "trajectory.csv", &run.trajectory)?;
        bundle.files.append(&mut sub.files);
        let require = name == ScenarioName::Fig4 && ANTIPHASE_BETAS.contains(&beta);
        bundle.observables.push(antiphase_observable(
            &format!("antiphase_beta_{beta}"),
            &run.trajectory,
            ANTIPHASE_WINDOW,
            require,
        ));
    }
    let dev = decoupling_deviation(config, cache)?;
    bundle.observables.push(Observable::check(
        "decoupling",
        dev,
        DECOUPLING_TOL,
        dev <= DECOUPLING_TOL,
    ));
    Ok(())
}

fn coefficient_files(
    config: &RunConfig,
    bundle: &mut ResultBundle,
    cache: &CoefficientCache,
) -> Result<(), RunError> {
    for which in 0..2 {
        let c = system_coefficients(config, which, cache)?;
        output::write_coefficients(bundle, &format!("coefficients_{}.csv", which + 1), &c)?;
    }
    Ok(())
}

fn dissipation_family(
    config: &RunConfig,
    bundle: &mut ResultBundle,
    cache: &CoefficientCache,
) -> Result<(), RunError> {
    coefficient_files(config, bundle, cache)?;
    for beta in BETA_FAMILY {
        let run = coupled_run(&family_config(config, beta), cache)?;
        let mut sub = ResultBundle::new(&bundle.dir.join(beta_dir(beta)));
        let time = &run.trajectory.time;
        output::write_dissipation(
            &mut sub,
            "dissipation.csv",
            time,
            [&run.dissipation[0], &run.dissipation[1]],
        )?;
        bundle.files.append(&mut sub.files);
        let margin = time
            .iter()
            .enumerate()
            .filter(|(_, t)| **t >= DISSIPATION_ORDER_FROM - 1e-12)
            .map(|(k, _)| run.dissipation[1][k] - run.dissipation[0][k])
            .fold(f64::INFINITY, f64::min);
        bundle.observables.push(
            Observable::check(
                format!("dissipation_order_beta_{beta}"),
                margin,
                0.0,
                margin > 0.0,
            )
            .with_window((DISSIPATION_ORDER_FROM, config.run.t_max)),
        );
    }
    Ok(())
}

fn delta_family(
    config: &RunConfig,
    bundle: &mut ResultBundle,
    cache: &CoefficientCache,
) -> Result<String, RunError> {
    coefficient_files(config, bundle, cache)?;
    let c1 = system_coefficients(config, 0, cache)?;
    let c2 = system_coefficients(config, 1, cache)?;
    let mut window = String::new();
    for beta in BETA_FAMILY {
        let cfg = family_config(config, beta);
        let d = delta_dissipation(
            &cfg.coupled_spec()?,
            [&c1, &c2],
            &coupled_init(&cfg),
            cfg.run.t_max,
        )?;
        window = d.window.to_string();
        let mut sub = ResultBundle::new(&bundle.dir.join(beta_dir(beta)));
        output::write_delta_dissipation(&mut sub, "delta_dissipation.csv", &d)?;
        bundle.files.append(&mut sub.files);
        let span = (0.0, cfg.run.t_max);
        let s1 = trend(&d.time, &d.delta[0]);
        let s2 = trend(&d.time, &d.delta[1]);
        bundle.observables.push(
            Observable::check(format!("delta_E1_trend_beta_{beta}"), s1, 0.0, s1 < 0.0)
                .with_window(span),
        );
        bundle.observables.push(
            Observable::check(format!("delta_E2_trend_beta_{beta}"), s2, 0.0, s2 > 0.0)
                .with_window(span),
        );
        let (r1, r2) = (d.mean_abs_rate[0], d.mean_abs_rate[1]);
        bundle
            .observables
            .push(Observable::info(format!("mean_abs_rate_1_beta_{beta}"), r1).with_window(span));
        bundle.observables.push(
            Observable::check(format!("rate_order_beta_{beta}"), r2 - r1, 0.0, r2 > r1)
                .with_window(span),
        );
    }
    Ok(window)
}
