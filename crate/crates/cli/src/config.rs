//! Run configuration: the TOML file schema, scenario presets and the fully
//! resolved [`RunConfig`].
//!
//! Every file value is optional. A `scenario` key selects a preset that
//! supplies defaults; explicit keys override the preset field by field.
//! Serializing a resolved configuration writes every field, so reparsing
//! it yields the identical [`RunConfig`].

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use selfosc_core::model::{BathSpec, CoupledSpec, Statistics, SystemSpec};
use selfosc_core::transport::{IntegralOptions, KernelConfig};

/// Configuration failures; all map to exit status 2.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

/// Named parameter presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioName {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 8] = [
        ScenarioName::Fig1,
        ScenarioName::Fig2,
        ScenarioName::Fig3,
        ScenarioName::Fig4,
        ScenarioName::Fig5,
        ScenarioName::Fig6,
        ScenarioName::Fig7,
        ScenarioName::Fig8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Fig1 => "fig1",
            ScenarioName::Fig2 => "fig2",
            ScenarioName::Fig3 => "fig3",
            ScenarioName::Fig4 => "fig4",
            ScenarioName::Fig5 => "fig5",
            ScenarioName::Fig6 => "fig6",
            ScenarioName::Fig7 => "fig7",
            ScenarioName::Fig8 => "fig8",
        }
    }

    /// Whether the preset describes two coupled oscillators.
    pub fn is_coupled(self) -> bool {
        !matches!(self, ScenarioName::Fig1 | ScenarioName::Fig2)
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioName::ALL
            .iter()
            .copied()
            .find(|n| n.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown scenario '{s}' (expected fig1..fig8)"))
    }
}

/// Oscillator-oscillator couplings of the preset coupled families.
pub const BETA_FAMILY: [f64; 4] = [0.01, 0.03, 0.1, 0.6];

/// One bath; gamma and temperature are in units of the first oscillator's
/// renormalized frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathConfig {
    pub statistics: Statistics,
    pub alpha: f64,
    pub gamma_over_omega: f64,
    pub kt_over_homega: f64,
}

/// One oscillator with its two baths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub omega: f64,
    pub baths: [BathConfig; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub t_max: f64,
    pub dt: f64,
    pub n0: [f64; 2],
    pub dn0: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub rtol: f64,
    pub w_max_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateSettings {
    pub modes: usize,
    pub w_max_over_gamma: f64,
    pub tolerance: f64,
    pub t_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Option<ScenarioName>,
    pub system: SystemConfig,
    pub system2: Option<SystemConfig>,
    /// Oscillator-oscillator coupling in units of Omega_1^2.
    pub beta: f64,
    pub run: RunSettings,
    pub quadrature: QuadratureSettings,
    pub abs_a_power: u8,
    pub validate: ValidateSettings,
    pub sweep: Vec<SweepAxis>,
    pub workers: usize,
}

// ---------------------------------------------------------------------------
// File schema

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oscillator: Option<FileOscillator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bath: Option<FileBathPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oscillator2: Option<FileOscillator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bath2: Option<FileBathPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<FileCoupling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<FileRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<FileQuadrature>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<FileKernel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validate: Option<FileValidate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<FileSweep>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOscillator {
    #[serde(rename = "Omega", skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileBathPair {
    #[serde(rename = "1", skip_serializing_if = "Option::is_none")]
    pub first: Option<FileBath>,
    #[serde(rename = "2", skip_serializing_if = "Option::is_none")]
    pub second: Option<FileBath>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileBath {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistics: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(rename = "gamma_over_Omega", skip_serializing_if = "Option::is_none")]
    pub gamma_over_omega: Option<f64>,
    #[serde(rename = "kT_over_hOmega", skip_serializing_if = "Option::is_none")]
    pub kt_over_homega: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileCoupling {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileRun {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dn0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dn0_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileQuadrature {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_max_factor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileKernel {
    #[serde(rename = "abs_A_power", skip_serializing_if = "Option::is_none")]
    pub abs_a_power: Option<u8>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileValidate {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_max_over_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSweep {
    #[serde(default)]
    pub axes: Vec<FileAxis>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileAxis {
    pub parameter: String,
    pub values: Vec<f64>,
}

// ---------------------------------------------------------------------------
// Presets

const fn bath(statistics: Statistics, alpha: f64, gamma: f64, temperature: f64) -> BathConfig {
    BathConfig {
        statistics,
        alpha,
        gamma_over_omega: gamma,
        kt_over_homega: temperature,
    }
}

const DEFAULT_RUN: RunSettings = RunSettings {
    t_max: 20.0,
    dt: 0.005,
    n0: [0.0; 2],
    dn0: [0.0; 2],
};

const DEFAULT_VALIDATE: ValidateSettings = ValidateSettings {
    modes: 400,
    w_max_over_gamma: 20.0,
    tolerance: 0.03,
    t_max: 10.0,
};

/// Weak-coupling all-bosonic system used when no scenario or system is given.
const DEFAULT_SYSTEM: SystemConfig = SystemConfig {
    omega: 1.0,
    baths: [
        bath(Statistics::Bosonic, 0.01, 10.0, 1.0),
        bath(Statistics::Bosonic, 0.01, 10.0, 1.0),
    ],
};

/// Single oscillator: fermionic bath 1 and bosonic bath 2.
const SINGLE_MIXED: SystemConfig = SystemConfig {
    omega: 1.0,
    baths: [
        bath(Statistics::Fermionic, 0.1, 10.0, 1.0),
        bath(Statistics::Bosonic, 0.05, 15.0, 0.1),
    ],
};

/// Two mixed oscillators with frequency ratio 2 and identical bath parameters.
const PAIR_FIRST: SystemConfig = SystemConfig {
    omega: 1.0,
    baths: [
        bath(Statistics::Fermionic, 0.03, 12.0, 0.5),
        bath(Statistics::Bosonic, 0.03, 12.0, 0.5),
    ],
};
const PAIR_SECOND: SystemConfig = SystemConfig {
    omega: 2.0,
    ..PAIR_FIRST
};

/// Mixed oscillator coupled to an oscillator with two bosonic baths.
const HYBRID_FIRST: SystemConfig = SystemConfig {
    omega: 1.0,
    baths: [
        bath(Statistics::Fermionic, 0.03, 12.0, 0.1),
        bath(Statistics::Bosonic, 0.03, 12.0, 1.0),
    ],
};
const HYBRID_SECOND: SystemConfig = SystemConfig {
    omega: 1.0,
    baths: [
        bath(Statistics::Bosonic, 0.05, 12.0, 1.0),
        bath(Statistics::Bosonic, 0.03, 15.0, 0.1),
    ],
};

/// Resolved configuration of a preset.
pub fn preset(name: ScenarioName) -> RunConfig {
    let (system, system2) = match name {
        ScenarioName::Fig1 | ScenarioName::Fig2 => (SINGLE_MIXED, None),
        ScenarioName::Fig3 | ScenarioName::Fig4 => (PAIR_FIRST, Some(PAIR_SECOND)),
        _ => (HYBRID_FIRST, Some(HYBRID_SECOND)),
    };
    let mut config = base(system);
    config.scenario = Some(name);
    config.system2 = system2;
    if name.is_coupled() {
        config.beta = 0.1;
    }
    config
}

fn base(system: SystemConfig) -> RunConfig {
    RunConfig {
        scenario: None,
        system,
        system2: None,
        beta: 0.0,
        run: DEFAULT_RUN,
        quadrature: QuadratureSettings {
            rtol: 1e-7,
            w_max_factor: 20.0,
        },
        abs_a_power: 2,
        validate: DEFAULT_VALIDATE,
        sweep: Vec::new(),
        workers: 1,
    }
}

// ---------------------------------------------------------------------------
// Resolution

/// Parses and resolves a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

/// Parses and resolves configuration text.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let file: FileConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    resolve(&file)
}

fn merge_bath(
    base: BathConfig,
    file: Option<&FileBath>,
    key: &str,
) -> Result<BathConfig, ConfigError> {
    let Some(file) = file else { return Ok(base) };
    let statistics = match &file.statistics {
        Some(s) => s
            .parse::<Statistics>()
            .map_err(|m| invalid(format!("{key}.statistics"), m))?,
        None => base.statistics,
    };
    Ok(BathConfig {
        statistics,
        alpha: file.alpha.unwrap_or(base.alpha),
        gamma_over_omega: file.gamma_over_omega.unwrap_or(base.gamma_over_omega),
        kt_over_homega: file.kt_over_homega.unwrap_or(base.kt_over_homega),
    })
}

fn merge_system(
    base: SystemConfig,
    osc: Option<&FileOscillator>,
    baths: Option<&FileBathPair>,
    prefix: &str,
) -> Result<SystemConfig, ConfigError> {
    let omega = osc.and_then(|o| o.omega).unwrap_or(base.omega);
    let b1 = merge_bath(
        base.baths[0],
        baths.and_then(|b| b.first.as_ref()),
        &format!("{prefix}.1"),
    )?;
    let b2 = merge_bath(
        base.baths[1],
        baths.and_then(|b| b.second.as_ref()),
        &format!("{prefix}.2"),
    )?;
    Ok(SystemConfig {
        omega,
        baths: [b1, b2],
    })
}

/// Applies presets and defaults, then validates.
pub fn resolve(file: &FileConfig) -> Result<RunConfig, ConfigError> {
    let mut config = match &file.scenario {
        Some(name) => preset(name.parse().map_err(|m: String| invalid("scenario", m))?),
        None => base(DEFAULT_SYSTEM),
    };
    config.system = merge_system(
        config.system,
        file.oscillator.as_ref(),
        file.bath.as_ref(),
        "bath",
    )?;
    if file.oscillator2.is_some() || file.bath2.is_some() {
        let start = config.system2.unwrap_or(config.system);
        config.system2 = Some(merge_system(
            start,
            file.oscillator2.as_ref(),
            file.bath2.as_ref(),
            "bath2",
        )?);
    }
    if let Some(beta) = file.coupling.as_ref().and_then(|c| c.beta) {
        config.beta = beta;
    }
    if let Some(run) = &file.run {
        let r = &mut config.run;
        r.t_max = run.t_max.unwrap_or(r.t_max);
        r.dt = run.dt.unwrap_or(r.dt);
        r.n0[0] = run.n0.unwrap_or(r.n0[0]);
        r.dn0[0] = run.dn0.unwrap_or(r.dn0[0]);
        r.n0[1] = run.n0_2.unwrap_or(r.n0[1]);
        r.dn0[1] = run.dn0_2.unwrap_or(r.dn0[1]);
        config.workers = run.workers.unwrap_or(config.workers);
    }
    if let Some(q) = &file.quadrature {
        config.quadrature.rtol = q.rtol.unwrap_or(config.quadrature.rtol);
        config.quadrature.w_max_factor = q.w_max_factor.unwrap_or(config.quadrature.w_max_factor);
    }
    if let Some(p) = file.kernel.as_ref().and_then(|k| k.abs_a_power) {
        config.abs_a_power = p;
    }
    if let Some(v) = &file.validate {
        let s = &mut config.validate;
        s.modes = v.modes.unwrap_or(s.modes);
        s.w_max_over_gamma = v.w_max_over_gamma.unwrap_or(s.w_max_over_gamma);
        s.tolerance = v.tolerance.unwrap_or(s.tolerance);
        s.t_max = v.t_max.unwrap_or(s.t_max);
    }
    if let Some(sweep) = &file.sweep {
        config.sweep = sweep
            .axes
            .iter()
            .map(|a| SweepAxis {
                parameter: a.parameter.clone(),
                values: a.values.clone(),
            })
            .collect();
    }
    config.validated()
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be finite and > 0, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be finite and >= 0, got {v}")))
    }
}

fn check_system(system: &SystemConfig, osc: &str, bath: &str) -> Result<(), ConfigError> {
    positive(&format!("{osc}.Omega"), system.omega)?;
    for (i, b) in system.baths.iter().enumerate() {
        let key = format!("{bath}.{}", i + 1);
        non_negative(&format!("{key}.alpha"), b.alpha)?;
        positive(&format!("{key}.gamma_over_Omega"), b.gamma_over_omega)?;
        non_negative(&format!("{key}.kT_over_hOmega"), b.kt_over_homega)?;
    }
    Ok(())
}

impl RunConfig {
    /// Checks every field, naming the offending key.
    pub fn validated(self) -> Result<Self, ConfigError> {
        check_system(&self.system, "oscillator", "bath")?;
        if let Some(s2) = &self.system2 {
            check_system(s2, "oscillator2", "bath2")?;
        }
        non_negative("coupling.beta", self.beta)?;
        positive("run.t_max", self.run.t_max)?;
        positive("run.dt", self.run.dt)?;
        if self.run.dt > self.run.t_max {
            return Err(invalid("run.dt", "must not exceed run.t_max"));
        }
        for (k, v) in [("run.n0", self.run.n0[0]), ("run.n0_2", self.run.n0[1])] {
            non_negative(k, v)?;
        }
        for (k, v) in [("run.dn0", self.run.dn0[0]), ("run.dn0_2", self.run.dn0[1])] {
            if !v.is_finite() {
                return Err(invalid(k, "must be finite"));
            }
        }
        if self.workers == 0 {
            return Err(invalid("run.workers", "must be >= 1"));
        }
        if !(self.quadrature.rtol > 0.0 && self.quadrature.rtol < 1.0) {
            return Err(invalid(
                "quadrature.rtol",
                format!("must lie in (0, 1), got {}", self.quadrature.rtol),
            ));
        }
        positive("quadrature.w_max_factor", self.quadrature.w_max_factor)?;
        if self.abs_a_power != 1 && self.abs_a_power != 2 {
            return Err(invalid(
                "kernel.abs_A_power",
                format!("must be 1 or 2, got {}", self.abs_a_power),
            ));
        }
        if self.validate.modes < 50 {
            return Err(invalid(
                "validate.modes",
                format!("must be >= 50, got {}", self.validate.modes),
            ));
        }
        if !(self.validate.w_max_over_gamma >= 10.0) {
            return Err(invalid("validate.w_max_over_gamma", "must be >= 10"));
        }
        positive("validate.tolerance", self.validate.tolerance)?;
        positive("validate.t_max", self.validate.t_max)?;
        for (i, axis) in self.sweep.iter().enumerate() {
            let key = format!("sweep.axes[{i}]");
            if !is_parameter_path(&axis.parameter) {
                return Err(invalid(
                    format!("{key}.parameter"),
                    format!("unknown parameter path '{}'", axis.parameter),
                ));
            }
            let second =
                axis.parameter.starts_with("bath2.") || axis.parameter.starts_with("oscillator2.");
            if second && self.system2.is_none() {
                return Err(invalid(
                    format!("{key}.parameter"),
                    "refers to a second oscillator that is not configured",
                ));
            }
            if let Some(v) = axis.values.iter().find(|v| !v.is_finite()) {
                return Err(invalid(
                    format!("{key}.values"),
                    format!("non-finite value {v}"),
                ));
            }
        }
        Ok(self)
    }

    pub fn is_coupled(&self) -> bool {
        self.system2.is_some()
    }

    pub fn kernel_config(&self) -> KernelConfig {
        KernelConfig {
            abs_a_power: self.abs_a_power,
            integral: IntegralOptions {
                rtol: self.quadrature.rtol,
                w_max_factor: self.quadrature.w_max_factor,
                ..IntegralOptions::default()
            },
            ..KernelConfig::default()
        }
    }

    /// Reference frequency Omega_1 that scales gamma and temperature.
    pub fn unit(&self) -> f64 {
        self.system.omega
    }

    pub fn system_spec(&self, which: usize) -> selfosc_core::Result<SystemSpec> {
        let system = match which {
            0 => &self.system,
            _ => self.system2.as_ref().ok_or_else(|| {
                selfosc_core::Error::Domain("no second oscillator configured".into())
            })?,
        };
        let unit = self.unit();
        let b = |c: &BathConfig| {
            BathSpec::new(
                c.statistics,
                c.alpha,
                c.gamma_over_omega * unit,
                c.kt_over_homega * unit,
            )
        };
        SystemSpec::new(system.omega, b(&system.baths[0])?, b(&system.baths[1])?)
    }

    pub fn coupled_spec(&self) -> selfosc_core::Result<CoupledSpec> {
        CoupledSpec::new(self.system_spec(0)?, self.system_spec(1)?, self.beta)
    }

    /// File form with every field written out.
    pub fn to_file_config(&self) -> FileConfig {
        let bath_file = |b: &BathConfig| FileBath {
            statistics: Some(b.statistics.name().to_string()),
            alpha: Some(b.alpha),
            gamma_over_omega: Some(b.gamma_over_omega),
            kt_over_homega: Some(b.kt_over_homega),
        };
        let pair = |s: &SystemConfig| FileBathPair {
            first: Some(bath_file(&s.baths[0])),
            second: Some(bath_file(&s.baths[1])),
        };
        FileConfig {
            scenario: self.scenario.map(|s| s.to_string()),
            oscillator: Some(FileOscillator {
                omega: Some(self.system.omega),
            }),
            bath: Some(pair(&self.system)),
            oscillator2: self.system2.as_ref().map(|s| FileOscillator {
                omega: Some(s.omega),
            }),
            bath2: self.system2.as_ref().map(pair),
            coupling: Some(FileCoupling {
                beta: Some(self.beta),
            }),
            run: Some(FileRun {
                t_max: Some(self.run.t_max),
                dt: Some(self.run.dt),
                n0: Some(self.run.n0[0]),
                dn0: Some(self.run.dn0[0]),
                n0_2: Some(self.run.n0[1]),
                dn0_2: Some(self.run.dn0[1]),
                workers: Some(self.workers),
            }),
            quadrature: Some(FileQuadrature {
                rtol: Some(self.quadrature.rtol),
                w_max_factor: Some(self.quadrature.w_max_factor),
            }),
            kernel: Some(FileKernel {
                abs_a_power: Some(self.abs_a_power),
            }),
            validate: Some(FileValidate {
                modes: Some(self.validate.modes),
                w_max_over_gamma: Some(self.validate.w_max_over_gamma),
                tolerance: Some(self.validate.tolerance),
                t_max: Some(self.validate.t_max),
            }),
            sweep: Some(FileSweep {
                axes: self
                    .sweep
                    .iter()
                    .map(|a| FileAxis {
                        parameter: a.parameter.clone(),
                        values: a.values.clone(),
                    })
                    .collect(),
            }),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file_config()).expect("configuration serializes")
    }

    /// Sets the parameter named by a sweep path.
    pub fn set_parameter(&mut self, path: &str, value: f64) -> Result<(), ConfigError> {
        let parts: Vec<&str> = path.split('.').collect();
        let count = |v: f64, key: &str| -> Result<usize, ConfigError> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(invalid(
                    key,
                    format!("expects a non-negative integer, got {v}"),
                ))
            }
        };
        match parts.as_slice() {
            ["oscillator", "Omega"] => self.system.omega = value,
            ["oscillator2", "Omega"] => self.system2_mut(path)?.omega = value,
            [section @ ("bath" | "bath2"), index @ ("1" | "2"), field] => {
                let system = if *section == "bath" {
                    &mut self.system
                } else {
                    self.system2_mut(path)?
                };
                let b = &mut system.baths[if *index == "1" { 0 } else { 1 }];
                match *field {
                    "alpha" => b.alpha = value,
                    "gamma_over_Omega" => b.gamma_over_omega = value,
                    "kT_over_hOmega" => b.kt_over_homega = value,
                    _ => return Err(invalid(path, "unknown parameter path")),
                }
            }
            ["coupling", "beta"] => self.beta = value,
            ["run", "t_max"] => self.run.t_max = value,
            ["run", "dt"] => self.run.dt = value,
            ["run", "n0"] => self.run.n0[0] = value,
            ["run", "n0_2"] => self.run.n0[1] = value,
            ["quadrature", "rtol"] => self.quadrature.rtol = value,
            ["quadrature", "w_max_factor"] => self.quadrature.w_max_factor = value,
            ["kernel", "abs_A_power"] => {
                self.abs_a_power =
                    u8::try_from(count(value, path)?).map_err(|_| invalid(path, "out of range"))?
            }
            _ => return Err(invalid(path, "unknown parameter path")),
        }
        Ok(())
    }

    fn system2_mut(&mut self, path: &str) -> Result<&mut SystemConfig, ConfigError> {
        self.system2
            .as_mut()
            .ok_or_else(|| invalid(path, "no second oscillator configured"))
    }
}

/// Whether `path` names a sweepable parameter.
pub fn is_parameter_path(path: &str) -> bool {
    let mut probe = base(DEFAULT_SYSTEM);
    probe.system2 = Some(DEFAULT_SYSTEM);
    probe.set_parameter(path, 1.0).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_preset_expands() {
        let c = parse_config_str("scenario = \"fig1\"\n").unwrap();
        assert_eq!(c, preset(ScenarioName::Fig1));
        let spec = c.system_spec(0).unwrap();
        assert!((spec.omega() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn explicit_statistics_give_mixed_mode() {
        let text = r#"
[oscillator]
Omega = 1.0
[bath.1]
statistics = "fermionic"
alpha = 0.1
gamma_over_Omega = 10
kT_over_hOmega = 1
[bath.2]
statistics = "bosonic"
alpha = 0.05
gamma_over_Omega = 15
kT_over_hOmega = 0.1
"#;
        let c = parse_config_str(text).unwrap();
        assert_eq!(
            c.system_spec(0).unwrap().mode(),
            selfosc_core::StatisticsMode::Mixed
        );
    }

    #[test]
    fn negative_alpha_names_the_key() {
        let err = parse_config_str("[bath.1]\nalpha = -0.1\n").unwrap_err();
        match err {
            ConfigError::Invalid { key, .. } => assert_eq!(key, "bath.1.alpha"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_info() {
        let err = parse_config_str("[run]\nt_max = 5\nbogus = 1\n").unwrap_err();
        match err {
            ConfigError::Parse(msg) => assert!(msg.contains("bogus") && msg.contains('3'), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_identity() {
        for name in ScenarioName::ALL {
            let mut c = preset(name);
            c.sweep.push(SweepAxis {
                parameter: "coupling.beta".into(),
                values: vec![0.01, 0.6],
            });
            let c = c.validated().unwrap();
            assert_eq!(parse_config_str(&c.to_toml()).unwrap(), c, "{name}");
        }
        let c = parse_config_str("[run]\nt_max = 3\n").unwrap();
        assert_eq!(parse_config_str(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn sweep_paths_are_checked() {
        assert!(is_parameter_path("coupling.beta"));
        assert!(is_parameter_path("bath.2.gamma_over_Omega"));
        assert!(!is_parameter_path("bath.3.alpha"));
        let err = parse_config_str("[[sweep.axes]]\nparameter = \"bath.1.beta\"\nvalues = [1.0]\n")
            .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { .. }));
        let err =
            parse_config_str("[[sweep.axes]]\nparameter = \"bath2.1.alpha\"\nvalues = [1.0]\n")
                .unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { .. }));
    }

    #[test]
    fn presets_match_their_parameter_sets() {
        let c = preset(ScenarioName::Fig3);
        let s2 = c.system_spec(1).unwrap();
        assert!((s2.omega_renormalized() - 2.0).abs() < 1e-15);
        assert!((c.system_spec(0).unwrap().omega() - 2.44).abs() < 1e-12);
        let c = preset(ScenarioName::Fig7);
        assert_eq!(
            c.system_spec(1).unwrap().mode(),
            selfosc_core::StatisticsMode::AllBosonic
        );
    }
}
