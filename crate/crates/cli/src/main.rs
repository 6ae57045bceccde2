//! `levitorque`: sweeps, simulations and field maps for a levitated nanorod
//! near a birefringent plate. Every run writes CSV files plus a JSON
//! manifest that can be replayed with `levitorque rerun`.

mod config;
mod job;
mod manifest;
mod units;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use levitorque_core::patch::AverageMode;

use config::RunConfig;
use job::Job;
use manifest::{file_sha256, Manifest};
use units::{parse_counts, parse_grid, parse_quantity};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] levitorque_core::Error),
    #[error("{context}")]
    Context { context: String, code: u8 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use levitorque_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e.root_cause() {
                E::Domain(_) | E::InvalidParameter(_) | E::UnknownMaterial(_) => 2,
                E::Convergence(_) | E::DegenerateDenominator { .. } | E::Instability(_) => 3,
                E::GridPoint { .. } => 3,
            },
            CliError::Context { code, .. } => *code,
            CliError::Io(_) | CliError::Mismatch(_) => 1,
        }
    }

    pub fn with_context(self, context: String) -> Self {
        let code = self.exit_code();
        CliError::Context { context, code }
    }
}

#[derive(Debug, Parser)]
#[command(name = "levitorque", version, about = "Casimir torque, trapping, sensitivity and patch-potential calculations")]
struct Cli {
    /// TOML file with [materials], [rod], [trap], [environment], [quadrature], [pulse], [patch] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config file).
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Plate material (batio3, calcite).
    #[arg(long, global = true)]
    material: Option<String>,
    /// Trapping laser power, e.g. 100mW.
    #[arg(long, global = true)]
    power: Option<String>,
    /// Beam waist, e.g. 400nm.
    #[arg(long, global = true)]
    waist: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    #[value(name = "1d")]
    OneD,
    #[value(name = "2d")]
    TwoD,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Casimir free energy, force and torque over separation and/or angle.
    CasimirSweep {
        #[arg(long, default_value = "100nm:600nm:50", allow_hyphen_values = true)]
        d: String,
        #[arg(long, default_value = "45deg", allow_hyphen_values = true)]
        theta: String,
        /// Defaults to the environment temperature.
        #[arg(long)]
        temperature: Option<String>,
    },
    /// Casimir force and torque against temperature with frozen dielectric data.
    TempSweep {
        #[arg(long, default_value = "266nm")]
        d: String,
        #[arg(long, default_value = "45deg", allow_hyphen_values = true)]
        theta: String,
        #[arg(long, default_value = "100K:400K:31")]
        temperature: String,
    },
    /// Optical trap potential and force against separation.
    TrapProfile {
        #[arg(long, default_value = "100nm:600nm:501")]
        d: String,
    },
    /// Torque and force noise floors against gas pressure.
    Sensitivity {
        #[arg(long, default_value = "1e-9torr:1torr:log:40")]
        pressure: String,
    },
    /// Pulsed on/off/feedback trajectory and optional repeated cycles.
    PulseSim {
        /// Enables Langevin gas kicks.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of measurement cycles to average.
        #[arg(long, default_value_t = 0)]
        cycles: usize,
        #[arg(long)]
        pressure: Option<String>,
    },
    /// Patch potential, field and induced torque on an x/y/z grid.
    PatchMap {
        #[arg(long, default_value = "-5um:5um:81", allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value = "-5um:5um:81", allow_hyphen_values = true)]
        y: String,
        #[arg(long, default_value = "266nm")]
        z: String,
    },
    /// Largest averaged patch torque against the number of measurement positions.
    PatchAverage {
        /// Measurement counts; defaults to 1..30 in 1-D and squares up to 64 in 2-D.
        #[arg(long)]
        n: Option<String>,
        #[arg(long, value_enum, default_value = "1d")]
        mode: Mode,
    },
    /// Built-in material parameters.
    Catalog,
    /// Re-runs a manifest and checks that every output is reproduced byte for byte.
    Rerun {
        manifest: PathBuf,
    },
}

fn grid(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    parse_grid(text).map_err(|e| CliError::Config(format!("--{flag}: {e}")))
}

fn single(flag: &str, text: &str) -> Result<f64, CliError> {
    parse_quantity(text).map_err(|e| CliError::Config(format!("--{flag}: {e}")))
}

fn resolve(cli: &Cli) -> Result<(Job, RunConfig), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(m) = &cli.material {
        cfg.materials.plate = m.clone();
    }
    if let Some(p) = &cli.power {
        cfg.trap.power = single("power", p)?;
    }
    if let Some(w) = &cli.waist {
        cfg.trap.waist = single("waist", w)?;
    }
    let job = match &cli.command {
        Command::CasimirSweep { d, theta, temperature } => Job::CasimirSweep {
            d: grid("d", d)?,
            theta: grid("theta", theta)?,
            temperature: match temperature {
                Some(t) => grid("temperature", t)?,
                None => vec![cfg.environment.temperature],
            },
        },
        Command::TempSweep { d, theta, temperature } => Job::TempSweep {
            d: single("d", d)?,
            theta: single("theta", theta)?,
            temperature: grid("temperature", temperature)?,
        },
        Command::TrapProfile { d } => Job::TrapProfile { d: grid("d", d)? },
        Command::Sensitivity { pressure } => Job::Sensitivity { pressure: grid("pressure", pressure)? },
        Command::PulseSim { seed, cycles, pressure } => {
            if let Some(p) = pressure {
                cfg.environment.pressure = single("pressure", p)?;
            }
            Job::PulseSim { seed: *seed, cycles: *cycles }
        }
        Command::PatchMap { x, y, z } => Job::PatchMap { x: grid("x", x)?, y: grid("y", y)?, z: grid("z", z)? },
        Command::PatchAverage { n, mode } => {
            let mode = match mode {
                Mode::OneD => AverageMode::OneD,
                Mode::TwoD => AverageMode::TwoD,
            };
            let default = match mode {
                AverageMode::OneD => "1:30:30",
                AverageMode::TwoD => "1,4,9,16,25,36,49,64",
            };
            let text = n.as_deref().unwrap_or(default);
            let n = parse_counts(text).map_err(|e| CliError::Config(format!("--n: {e}")))?;
            Job::PatchAverage { n, mode }
        }
        Command::Catalog => Job::Catalog,
        Command::Rerun { .. } => unreachable!("rerun is resolved from its manifest"),
    };
    Ok((job, cfg))
}

/// Runs a job, writes its manifest, and reports surface capture as an error
/// after the partial outputs are on disk.
fn execute(job: &Job, cfg: &RunConfig) -> Result<Manifest, CliError> {
    let out = job.run(cfg)?;
    let manifest = Manifest::new(job, cfg, &out.files)?;
    let path = manifest.write(&cfg.output_dir)?;
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    println!("wrote {}", path.display());
    if let Some(msg) = out.capture {
        return Err(CliError::Context { context: msg, code: 4 });
    }
    Ok(manifest)
}

fn rerun(path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let old = Manifest::read(path)?;
    let mut cfg = old.config.clone();
    cfg.output_dir = match out {
        Some(o) => o.to_path_buf(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    if manifest::config_hash(&old.job, &old.config) != old.config_hash {
        return Err(CliError::Config(format!("{}: config_hash does not match its contents", path.display())));
    }
    let new = execute(&old.job, &cfg)?;
    let mut bad = Vec::new();
    for entry in &old.outputs {
        let now = file_sha256(&cfg.output_dir.join(&entry.path))?;
        if now != entry.sha256 {
            bad.push(entry.path.clone());
        }
    }
    if bad.is_empty() && new.outputs.len() == old.outputs.len() {
        println!("reproduced {} output(s) of {}", old.outputs.len(), old.subcommand);
        Ok(())
    } else {
        Err(CliError::Mismatch(format!("outputs differ from the manifest: {}", bad.join(", "))))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Rerun { manifest } => rerun(manifest, cli.out.as_deref()),
        _ => resolve(&cli).and_then(|(job, cfg)| execute(&job, &cfg).map(|_| ())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
