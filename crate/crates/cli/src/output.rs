//! CSV and metadata writers. Every file is written to a temporary sibling
//! and renamed into place.

use std::fs;
use std::path::{Path, PathBuf};

use selfosc_core::dynamics::{DeltaDissipation, Trajectory};
use selfosc_core::transport::CoefficientSeries;

use crate::config::RunConfig;
use crate::RunError;

pub const COEFFICIENT_COLUMNS: [&str; 8] = [
    "t", "lambda", "D", "D1_part", "D2_part", "I1", "I2", "ratio",
];
pub const OBSERVABLE_COLUMNS: [&str; 6] = [
    "name",
    "value",
    "window_lo",
    "window_hi",
    "tolerance",
    "status",
];
pub const DISSIPATION_COLUMNS: [&str; 3] = ["t", "E1", "E2"];
pub const DELTA_DISSIPATION_COLUMNS: [&str; 5] = ["t", "dE1", "dE2", "rate1", "rate2"];

/// Outcome of one observable check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported without a pass criterion.
    Info,
    /// The observable could not be evaluated.
    Undefined,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Info => "info",
            Status::Undefined => "undefined",
            Status::Skipped => "skipped",
        }
    }

    pub fn from_check(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One row of an observables file.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub name: String,
    pub value: f64,
    pub window: Option<(f64, f64)>,
    pub tolerance: Option<f64>,
    pub status: Status,
}

impl Observable {
    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Observable {
            name: name.into(),
            value,
            window: None,
            tolerance: None,
            status: Status::Info,
        }
    }

    pub fn check(name: impl Into<String>, value: f64, tolerance: f64, ok: bool) -> Self {
        Observable {
            name: name.into(),
            value,
            window: None,
            tolerance: Some(tolerance),
            status: Status::from_check(ok),
        }
    }

    pub fn undefined(name: impl Into<String>) -> Self {
        Observable {
            name: name.into(),
            value: f64::NAN,
            window: None,
            tolerance: None,
            status: Status::Undefined,
        }
    }

    pub fn with_window(mut self, window: (f64, f64)) -> Self {
        self.window = Some(window);
        self
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }
}

/// Files and observables produced by one command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultBundle {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub observables: Vec<Observable>,
}

impl ResultBundle {
    pub fn new(dir: &Path) -> Self {
        ResultBundle {
            dir: dir.to_path_buf(),
            ..Default::default()
        }
    }

    pub fn failures(&self) -> Vec<&Observable> {
        self.observables
            .iter()
            .filter(|o| o.status == Status::Fail)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn observable(&self, name: &str) -> Option<&Observable> {
        self.observables.iter().find(|o| o.name == name)
    }
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

fn io_err(path: &Path, source: std::io::Error) -> RunError {
    RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Serializes `rows` under `header` into CSV text.
pub fn csv_text<S: AsRef<str>>(
    header: &[S],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<Vec<u8>, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header.iter().map(|h| h.as_ref()))?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| RunError::Io {
        path: "<csv buffer>".into(),
        source: e.into_error(),
    })
}

fn write_csv<S: AsRef<str>>(
    bundle: &mut ResultBundle,
    name: &str,
    header: &[S],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), RunError> {
    let path = bundle.dir.join(name);
    write_atomic(&path, &csv_text(header, rows)?)?;
    bundle.files.push(path);
    Ok(())
}

pub fn write_coefficients(
    bundle: &mut ResultBundle,
    name: &str,
    c: &CoefficientSeries,
) -> Result<(), RunError> {
    let rows = (0..c.len()).map(|k| {
        vec![
            fmt(c.time[k]),
            fmt(c.lambda[k]),
            fmt(c.diffusion[k]),
            fmt(c.partial_diffusion[0][k]),
            fmt(c.partial_diffusion[1][k]),
            fmt(c.bath_integrals[0][k]),
            fmt(c.bath_integrals[1][k]),
            c.ratio[k].map(fmt).unwrap_or_default(),
        ]
    });
    write_csv(bundle, name, &COEFFICIENT_COLUMNS, rows)
}

/// Columns `t, n1[, n2], dn1_dt[, dn2_dt]`.
pub fn trajectory_columns(channels: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=channels).map(|c| format!("n{c}")));
    h.extend((1..=channels).map(|c| format!("dn{c}_dt")));
    h
}

pub fn write_trajectory(
    bundle: &mut ResultBundle,
    name: &str,
    traj: &Trajectory,
) -> Result<(), RunError> {
    let rows = (0..traj.len()).map(|k| {
        let mut row = vec![fmt(traj.time[k])];
        row.extend(traj.n.iter().map(|n| fmt(n[k])));
        row.extend(traj.dn_dt.iter().map(|d| fmt(d[k])));
        row
    });
    write_csv(bundle, name, &trajectory_columns(traj.channels()), rows)
}

pub fn write_dissipation(
    bundle: &mut ResultBundle,
    name: &str,
    time: &[f64],
    e: [&[f64]; 2],
) -> Result<(), RunError> {
    let rows = (0..time.len()).map(|k| vec![fmt(time[k]), fmt(e[0][k]), fmt(e[1][k])]);
    write_csv(bundle, name, &DISSIPATION_COLUMNS, rows)
}

pub fn write_delta_dissipation(
    bundle: &mut ResultBundle,
    name: &str,
    d: &DeltaDissipation,
) -> Result<(), RunError> {
    let rows = (0..d.time.len()).map(|k| {
        vec![
            fmt(d.time[k]),
            fmt(d.delta[0][k]),
            fmt(d.delta[1][k]),
            fmt(d.rate[0][k]),
            fmt(d.rate[1][k]),
        ]
    });
    write_csv(bundle, name, &DELTA_DISSIPATION_COLUMNS, rows)
}

pub fn observable_rows(observables: &[Observable]) -> Vec<Vec<String>> {
    observables
        .iter()
        .map(|o| {
            vec![
                o.name.clone(),
                fmt(o.value),
                o.window.map(|w| fmt(w.0)).unwrap_or_default(),
                o.window.map(|w| fmt(w.1)).unwrap_or_default(),
                o.tolerance.map(fmt).unwrap_or_default(),
                o.status.as_str().to_string(),
            ]
        })
        .collect()
}

/// Writes the bundle's observables to `name`.
pub fn write_observables(bundle: &mut ResultBundle, name: &str) -> Result<(), RunError> {
    let rows = observable_rows(&bundle.observables);
    write_csv(bundle, name, &OBSERVABLE_COLUMNS, rows)
}

/// Writes `config.toml` (the resolved configuration, reparseable) and
/// `metadata.toml` (command, versions, conventions and the same
/// configuration under `[config]`).
pub fn write_metadata(
    bundle: &mut ResultBundle,
    command: &str,
    config: &RunConfig,
    extra: &[(&str, String)],
) -> Result<(), RunError> {
    let config_text = config.to_toml();
    let config_path = bundle.dir.join("config.toml");
    write_atomic(&config_path, config_text.as_bytes())?;
    bundle.files.push(config_path);

    let mut info = toml::Table::new();
    info.insert("command".into(), command.into());
    info.insert("tool".into(), env!("CARGO_PKG_NAME").into());
    info.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    info.insert(
        "units".into(),
        "hbar = k_B = 1; frequencies, gamma and kT in units of Omega_1; time in 1/Omega_1".into(),
    );
    info.insert("beta_unit".into(), "Omega_1^2".into());
    info.insert(
        "threading".into(),
        "each trajectory and coefficient series is computed sequentially".into(),
    );
    for (k, v) in extra {
        info.insert((*k).into(), v.clone().into());
    }
    let mut tol = toml::Table::new();
    tol.insert("quadrature_rtol".into(), config.quadrature.rtol.into());
    tol.insert("w_max_factor".into(), config.quadrature.w_max_factor.into());
    tol.insert("abs_A_power".into(), i64::from(config.abs_a_power).into());
    tol.insert("grid_dt".into(), config.run.dt.into());
    let mut root = toml::Table::new();
    root.insert("run_info".into(), info.into());
    root.insert("tolerances".into(), tol.into());
    let cfg = toml::Table::try_from(config.to_file_config()).expect("configuration serializes");
    root.insert("config".into(), cfg.into());
    let path = bundle.dir.join("metadata.toml");
    write_atomic(
        &path,
        toml::to_string(&root)
            .expect("metadata serializes")
            .as_bytes(),
    )?;
    bundle.files.push(path);
    Ok(())
}
