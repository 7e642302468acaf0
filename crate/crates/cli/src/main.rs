//! `casimirbind`: sweeps of the two-sphere interaction landscape.
//!
//! Exit codes: 0 on success, 2 for configuration or usage errors, 3 for
//! numerical failures.

mod commands;
mod config;
mod error;
mod output;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use casimirbind_core::{CpMethodChoice, PolarizationConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::commands::Run;
use crate::config::{GridSpec, RunConfig};
use crate::error::CliError;

const UNITS: &str = "Units: intensities in W/um^2 (1 W/um^2 = 1e12 W/m^2), lengths in m, \
temperatures in K, phases in rad. CSV energies are U/k_B in K.";

#[derive(Parser)]
#[command(name = "casimirbind", version, about = "Casimir-Polder and optical-binding landscapes of two nanospheres", after_help = UNITS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-sphere potentials along the x axis (potential.csv).
    Potential(Scenario),
    /// Potentials against separation and relative phase, with the stability analysis
    /// (phase.csv, stability.json).
    Phase(Scenario),
    /// Potential of sphere A over the z = 0 plane for yy, xy and xx polarizations
    /// (polmap_{yy,xy,xx}.csv).
    Polmap(Scenario),
    /// Fitted power laws of each interaction regime (regimes.json, regimes_curves.csv).
    Regimes(Scenario),
    /// Squeezing needed to match a coherent intensity, or the intensity a squeeze parameter gives.
    Squeeze(SqueezeArgs),
    /// Writes a gnuplot script for a finished run directory.
    Plotscript {
        /// Run directory containing manifest.json and its outputs.
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Pol {
    Yy,
    Xy,
    Xx,
}

impl From<Pol> for PolarizationConfig {
    fn from(p: Pol) -> Self {
        match p {
            Pol::Yy => PolarizationConfig::Yy,
            Pol::Xy => PolarizationConfig::Xy,
            Pol::Xx => PolarizationConfig::Xx,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Matsubara,
    Quadrature,
}

#[derive(Args)]
struct Scenario {
    /// JSON config file (a run manifest is accepted too).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in parameter set: fig2, fig3a, fig3b, fig4, fig5.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Tweezer intensity [W/um^2].
    #[arg(long)]
    intensity: Option<f64>,
    /// Drive wavelength [m].
    #[arg(long)]
    wavelength: Option<f64>,
    /// Relative optical phase phi_B - phi_A [rad].
    #[arg(long, allow_hyphen_values = true)]
    dphi: Option<f64>,
    /// Tweezer polarizations of A and B.
    #[arg(long, value_enum)]
    pol: Option<Pol>,
    /// Temperature [K].
    #[arg(long)]
    temperature: Option<f64>,
    /// Sphere radius [m].
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_enum)]
    cp_method: Option<Method>,
    /// Separation grid "min:max:points:log|lin" [m].
    #[arg(long)]
    grid: Option<String>,
    /// Worker threads; output does not depend on this.
    #[arg(long, env = "CASIMIRBIND_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct SqueezeArgs {
    /// Target coherent intensity [W/um^2].
    #[arg(long, conflicts_with = "squeeze_r")]
    intensity: Option<f64>,
    /// Squeeze parameter r.
    #[arg(long)]
    squeeze_r: Option<f64>,
    /// Drive wavelength [m].
    #[arg(long, default_value_t = 1064e-9)]
    wavelength: f64,
}

impl Scenario {
    fn flags(&self) -> Result<Map<String, Value>, CliError> {
        let mut m = Map::new();
        let mut put = |k: &str, v: Value| {
            m.insert(k.into(), v);
        };
        if let Some(v) = self.intensity {
            put("intensity_w_um2", json!(v));
        }
        if let Some(v) = self.wavelength {
            put("wavelength_m", json!(v));
        }
        if let Some(v) = self.dphi {
            put("dphi_rad", json!(v));
        }
        if let Some(p) = self.pol {
            put(
                "pol",
                serde_json::to_value(PolarizationConfig::from(p)).expect("serializes"),
            );
        }
        if let Some(v) = self.temperature {
            put("temperature_k", json!(v));
        }
        if let Some(v) = self.radius {
            put("radius_m", json!(v));
        }
        if let Some(c) = self.cp_method {
            let c = match c {
                Method::Matsubara => CpMethodChoice::Matsubara,
                Method::Quadrature => CpMethodChoice::Quadrature,
            };
            put("cp_method", serde_json::to_value(c).expect("serializes"));
        }
        if let Some(g) = &self.grid {
            put(
                "grid",
                serde_json::to_value(GridSpec::parse(g)?).expect("serializes"),
            );
        }
        // Non-finite values serialize as null and would be rejected later
        // with a less helpful message.
        if m.values().any(Value::is_null) {
            return Err(CliError::Config("numeric flags must be finite".into()));
        }
        Ok(m)
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = self
            .config
            .as_deref()
            .map(config::read_config_file)
            .transpose()?;
        config::resolve(self.preset.as_deref(), file, self.flags()?)
    }
}

fn init_threads(threads: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    }
    Ok(rayon::current_num_threads())
}

fn scenario_run(
    s: &Scenario,
    f: impl Fn(&Run) -> Result<output::RunManifest, CliError>,
) -> Result<(), CliError> {
    let cfg = s.resolve()?;
    let threads = init_threads(s.threads)?;
    let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let run = Run {
        config: &cfg,
        out: &s.out,
        timestamp: &timestamp,
        threads,
    };
    let manifest = f(&run)?;
    eprintln!("{} in {}", commands::summary(&manifest), s.out.display());
    Ok(())
}

fn plotscript(dir: &Path) -> Result<(), CliError> {
    let script = plot::render(dir)?;
    output::write_atomic(&dir.join(plot::SCRIPT), &script)?;
    eprintln!("wrote {}", dir.join(plot::SCRIPT).display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Potential(s) => scenario_run(&s, commands::potential),
        Command::Phase(s) => scenario_run(&s, commands::phase),
        Command::Polmap(s) => {
            let only = s.pol.map(PolarizationConfig::from);
            scenario_run(&s, |r| commands::polmap(r, only))
        }
        Command::Regimes(s) => scenario_run(&s, commands::regimes),
        Command::Squeeze(a) => {
            let report = commands::squeeze(a.intensity, a.squeeze_r, a.wavelength)?;
            println!(
                "{}",
                serde_json::to_string(&report).expect("report serializes")
            );
            Ok(())
        }
        Command::Plotscript { dir } => plotscript(&dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
