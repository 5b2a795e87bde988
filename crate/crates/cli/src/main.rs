use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use selfosc_cli::config::{resolve, FileConfig, RunConfig, ScenarioName};
use selfosc_cli::output::{ResultBundle, Status};
use selfosc_cli::run::{run_asymptotics, run_coeffs, run_coupled, run_evolve, CoefficientCache};
use selfosc_cli::scenario::run_scenario;
use selfosc_cli::sweep::run_sweep;
use selfosc_cli::validate::{run_validate, Fault};
use selfosc_cli::{ConfigError, RunError, EXIT_IO, EXIT_OK, EXIT_VALIDATION};

/// Occupation-number dynamics of oscillators coupled to fermionic and
/// bosonic heat baths.
#[derive(Debug, Parser)]
#[command(name = "selfosc", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Worker threads for sweeps (overrides run.workers).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Quadrature relative tolerance (overrides quadrature.rtol).
    #[arg(long, global = true)]
    rtol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Friction and diffusion coefficient series.
    Coeffs,
    /// Single-oscillator master equation.
    Evolve,
    /// Two coupled oscillators at the configured beta.
    Coupled,
    /// Large-time limits and the stationarity residual.
    Asymptotics,
    /// Preset scenario fig1..fig8.
    Scenario {
        /// Scenario name.
        name: ScenarioName,
    },
    /// Cartesian sweep over the configured axes.
    Sweep,
    /// Oracle comparison and invariant suite; exit status 4 on a breach.
    Validate {
        /// Corrupt the run on purpose (lambda-sign).
        #[arg(long)]
        inject_fault: Option<Fault>,
    },
}

fn load(cli: &Cli, scenario: Option<ScenarioName>) -> Result<RunConfig, RunError> {
    let mut file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.display().to_string(),
                source,
            })?;
            toml::from_str::<FileConfig>(&text).map_err(|e| ConfigError::Parse(e.to_string()))?
        }
        None => FileConfig::default(),
    };
    if let Some(name) = scenario {
        file.scenario = Some(name.to_string());
    }
    let mut config = resolve(&file)?;
    if let Some(w) = cli.workers {
        config.workers = w;
    }
    if let Some(r) = cli.rtol {
        config.quadrature.rtol = r;
    }
    Ok(config.validated()?)
}

fn report(bundle: &ResultBundle) {
    for o in &bundle.observables {
        if o.status != Status::Info {
            println!("{:<36} {:>14.6e}  {}", o.name, o.value, o.status.as_str());
        }
    }
    println!(
        "wrote {} files to {}",
        bundle.files.len(),
        bundle.dir.display()
    );
}

fn execute(cli: &Cli) -> Result<u8, RunError> {
    let cache = CoefficientCache::new();
    let scenario = match &cli.command {
        Command::Scenario { name } => Some(*name),
        _ => None,
    };
    let config = load(cli, scenario)?;
    for w in config.system_spec(0)?.warnings() {
        eprintln!("warning: {w}");
    }
    let out = &cli.out;
    let bundle = match &cli.command {
        Command::Coeffs => run_coeffs(&config, out, &cache)?,
        Command::Evolve => run_evolve(&config, out, &cache)?,
        Command::Coupled => run_coupled(&config, out, &cache)?,
        Command::Asymptotics => run_asymptotics(&config, out)?,
        Command::Scenario { name } => run_scenario(*name, &config, out, &cache)?,
        Command::Sweep => {
            let (bundle, outcomes) = run_sweep(&config, out, &cache)?;
            let failed = outcomes.iter().filter(|o| o.result.is_err()).count();
            println!("{} points, {failed} failed", outcomes.len());
            bundle
        }
        Command::Validate { inject_fault } => {
            let bundle = run_validate(&config, out, *inject_fault, &cache)?;
            report(&bundle);
            if !bundle.passed() {
                eprintln!(
                    "validation failed: {} check(s) outside tolerance",
                    bundle.failures().len()
                );
                return Ok(EXIT_VALIDATION);
            }
            return Ok(EXIT_OK);
        }
    };
    report(&bundle);
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli).with_context(|| format!("selfosc {:?} failed", cli.command));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<RunError>()
                .map(RunError::exit_code)
                .unwrap_or(EXIT_IO);
            ExitCode::from(code)
        }
    }
}
