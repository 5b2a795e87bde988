//! Cartesian parameter sweeps executed on a worker pool.

use std::path::Path;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::output::{self, ResultBundle};
use crate::run::{run_coupled, run_evolve, CoefficientCache};
use crate::RunError;

/// One point of a sweep: parameter values in axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub values: Vec<f64>,
}

/// Outcome of one point, as recorded in the index.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub point: SweepPoint,
    pub dir: String,
    pub result: Result<[Option<f64>; 2], String>,
}

/// Cartesian product of the axes in row-major order (last axis fastest).
/// No axes yields one point with no values.
pub fn sweep_points(config: &RunConfig) -> Vec<SweepPoint> {
    let mut points = vec![Vec::new()];
    for axis in &config.sweep {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    points
        .into_iter()
        .enumerate()
        .map(|(index, values)| SweepPoint { index, values })
        .collect()
}

/// Configuration of one point, validated.
pub fn point_config(config: &RunConfig, point: &SweepPoint) -> Result<RunConfig, RunError> {
    let mut c = config.clone();
    c.sweep.clear();
    for (axis, v) in config.sweep.iter().zip(&point.values) {
        c.set_parameter(&axis.parameter, *v)?;
    }
    Ok(c.validated()?)
}

fn run_point(
    config: &RunConfig,
    point: &SweepPoint,
    out: &Path,
    cache: &CoefficientCache,
) -> PointOutcome {
    let dir = format!("point_{:04}", point.index);
    let result = point_config(config, point).and_then(|c| {
        let target = out.join(&dir);
        let bundle = if c.is_coupled() {
            run_coupled(&c, &target, cache)?
        } else {
            run_evolve(&c, &target, cache)?
        };
        let pick = |name: &str| bundle.observable(name).map(|o| o.value);
        Ok([pick("n1_final"), pick("n2_final")])
    });
    PointOutcome {
        point: point.clone(),
        dir,
        result: result.map_err(|e| e.to_string()),
    }
}

/// Index CSV text: one row per point, in point order.
pub fn index_csv(config: &RunConfig, outcomes: &[PointOutcome]) -> Result<Vec<u8>, RunError> {
    let mut header = vec!["point".to_string()];
    header.extend(config.sweep.iter().map(|a| a.parameter.clone()));
    header.extend(["status", "n1_final", "n2_final", "dir", "message"].map(String::from));
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let rows = outcomes.iter().map(|o| {
        let mut row = vec![o.point.index.to_string()];
        row.extend(o.point.values.iter().map(|v| v.to_string()));
        match &o.result {
            Ok([n1, n2]) => row.extend([
                "ok".into(),
                opt(*n1),
                opt(*n2),
                o.dir.clone(),
                String::new(),
            ]),
            Err(msg) => row.extend([
                "error".into(),
                String::new(),
                String::new(),
                o.dir.clone(),
                msg.clone(),
            ]),
        }
        row
    });
    output::csv_text(&header, rows)
}

/// Runs every point on `config.workers` threads, then writes `index.csv`.
/// Per-point failures are recorded in the index and do not stop the sweep.
pub fn run_sweep(
    config: &RunConfig,
    out: &Path,
    cache: &CoefficientCache,
) -> Result<(ResultBundle, Vec<PointOutcome>), RunError> {
    for axis in &config.sweep {
        if !crate::config::is_parameter_path(&axis.parameter) {
            return Err(crate::config::ConfigError::Invalid {
                key: "sweep.axes.parameter".into(),
                message: format!("unknown parameter path '{}'", axis.parameter),
            }
            .into());
        }
    }
    output::ensure_dir(out)?;
    let points = sweep_points(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;
    let outcomes: Vec<PointOutcome> = pool.install(|| {
        points
            .par_iter()
            .map(|p| run_point(config, p, out, cache))
            .collect()
    });
    let mut bundle = ResultBundle::new(out);
    let index = out.join("index.csv");
    output::write_atomic(&index, &index_csv(config, &outcomes)?)?;
    bundle.files.push(index);
    output::write_metadata(
        &mut bundle,
        "sweep",
        config,
        &[("points", outcomes.len().to_string())],
    )?;
    Ok((bundle, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepAxis;

    #[test]
    fn empty_axes_give_one_point() {
        let c = crate::parse_config_str("").unwrap();
        assert_eq!(
            sweep_points(&c),
            vec![SweepPoint {
                index: 0,
                values: vec![]
            }]
        );
    }

    #[test]
    fn cartesian_order() {
        let mut c = crate::parse_config_str("").unwrap();
        c.sweep = vec![
            SweepAxis {
                parameter: "bath.1.alpha".into(),
                values: vec![0.01, 0.02],
            },
            SweepAxis {
                parameter: "run.t_max".into(),
                values: vec![1.0, 2.0, 3.0],
            },
        ];
        let p = sweep_points(&c);
        assert_eq!(p.len(), 6);
        assert_eq!(p[1].values, vec![0.01, 2.0]);
        assert_eq!(p[3].values, vec![0.02, 1.0]);
        let cfg = point_config(&c, &p[5]).unwrap();
        assert_eq!(cfg.system.baths[0].alpha, 0.02);
        assert_eq!(cfg.run.t_max, 3.0);
    }

    #[test]
    fn invalid_point_values_are_reported() {
        let mut c = crate::parse_config_str("").unwrap();
        c.sweep = vec![SweepAxis {
            parameter: "bath.1.alpha".into(),
            values: vec![-1.0],
        }];
        assert!(point_config(&c, &sweep_points(&c)[0]).is_err());
    }
}
