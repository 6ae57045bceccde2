//! Resolved subcommand parameters and their execution. A `Job` plus a
//! `RunConfig` fully determines the outputs, which is what makes reruns
//! from a manifest possible.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use levitorque_core::constants::TORR;
use levitorque_core::dynamics::{
    cycle_average, run_cycles, simulate_pulse, write_cycles_csv, write_trajectory_csv, Outcome,
};
use levitorque_core::lifshitz::{self, CasimirTable, SweepGrid, SweepPoint};
use levitorque_core::materials::catalog;
use levitorque_core::patch::{field_map, suppression_curve, write_field_csv, AverageMode, SuppressionRow};
use levitorque_core::sensing::{sensitivity_sweep, Illumination};
use levitorque_core::trap::{potential_profile, write_profile_csv};
use levitorque_core::Error;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Job {
    CasimirSweep { d: Vec<f64>, theta: Vec<f64>, temperature: Vec<f64> },
    TempSweep { d: f64, theta: f64, temperature: Vec<f64> },
    TrapProfile { d: Vec<f64> },
    /// Pressures in Pa.
    Sensitivity { pressure: Vec<f64> },
    PulseSim { seed: Option<u64>, cycles: usize },
    PatchMap { x: Vec<f64>, y: Vec<f64>, z: Vec<f64> },
    PatchAverage { n: Vec<usize>, mode: AverageMode },
    Catalog,
}

/// Files written by a job; `capture` is set when a trajectory ended on the
/// surface.
pub struct JobOutput {
    pub files: Vec<PathBuf>,
    pub capture: Option<String>,
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::CasimirSweep { .. } => "casimir-sweep",
            Job::TempSweep { .. } => "temp-sweep",
            Job::TrapProfile { .. } => "trap-profile",
            Job::Sensitivity { .. } => "sensitivity",
            Job::PulseSim { .. } => "pulse-sim",
            Job::PatchMap { .. } => "patch-map",
            Job::PatchAverage { .. } => "patch-average",
            Job::Catalog => "catalog",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::PulseSim { seed, .. } => *seed,
            _ => None,
        }
    }

    pub fn run(&self, cfg: &RunConfig) -> Result<JobOutput, CliError> {
        let dir = &cfg.output_dir;
        fs::create_dir_all(dir)?;
        let mut capture = None;
        let files = match self {
            Job::CasimirSweep { d, theta, temperature } => {
                let points = product(d, theta, temperature)?;
                vec![casimir_rows(cfg, &points, &dir.join("casimir_sweep.csv"))?]
            }
            Job::TempSweep { d, theta, temperature } => {
                let points = SweepGrid::Temperature(temperature.clone()).points(*d, *theta, 0.0)?;
                vec![casimir_rows(cfg, &points, &dir.join("temp_sweep.csv"))?]
            }
            Job::TrapProfile { d } => {
                let pol = cfg.optical_polarizability()?;
                cfg.trap.validate()?;
                let rows = potential_profile(d, &cfg.trap, &pol);
                let path = dir.join("trap_profile.csv");
                write_with(&path, |w| write_profile_csv(w, &rows))?;
                vec![path]
            }
            Job::Sensitivity { pressure } => {
                let pol = cfg.optical_polarizability()?;
                let light = Illumination { intensity: cfg.trap.peak_intensity(), wavelength: cfg.trap.wavelength };
                let torr: Vec<f64> = pressure.iter().map(|p| p / TORR).collect();
                let rows = sensitivity_sweep(&torr, &cfg.rod, &cfg.environment, &light, &pol)?;
                let path = dir.join("sensitivity.csv");
                write_with(&path, |w| levitorque_core::sensing::write_sweep_csv(w, &rows))?;
                vec![path]
            }
            Job::PulseSim { seed, cycles } => {
                let setup = cfg.pulse_setup()?;
                let p = &cfg.pulse;
                let table = CasimirTable::build(
                    &cfg.solver()?,
                    p.table_d_min,
                    p.table_d_max,
                    p.table_nodes,
                    cfg.environment.temperature,
                )?;
                let run = simulate_pulse(&setup, &table, *seed)?;
                let traj = dir.join("pulse_trajectory.csv");
                write_with(&traj, |w| write_trajectory_csv(w, &run.trajectory))?;
                let mut files = vec![traj];
                if let Outcome::SurfaceCapture { t, d } = run.outcome {
                    capture = Some(format!("surface capture at t = {t:e} s (d = {d:e} m)"));
                } else {
                    if let (Some(fall), Some(acc)) = (run.off_fall(), run.off_initial_acceleration) {
                        println!(
                            "equilibrium d = {:.3} nm, off-window fall = {:.3} nm, onset acceleration = {:.1} m/s^2",
                            run.initial.d * 1e9,
                            fall * 1e9,
                            -acc
                        );
                    }
                    if *cycles > 0 {
                        let rows = run_cycles(&setup, &table, *cycles, *seed)?;
                        let avg = cycle_average(&rows, rows.len(), setup.schedule.off_duration())?;
                        println!(
                            "{} cycles: torque = {:.4e} +/- {:.2e} N m (path average {:.4e})",
                            avg.n_cycles, avg.torque, avg.std_error, avg.oracle_torque
                        );
                        let path = dir.join("pulse_cycles.csv");
                        write_with(&path, |w| write_cycles_csv(w, &rows))?;
                        files.push(path);
                    }
                }
                files
            }
            Job::PatchMap { x, y, z } => {
                let pol = cfg.static_polarizability()?;
                let rows = field_map(x, y, z, &cfg.patch_averaging().patch, &pol)?;
                let path = dir.join("patch_map.csv");
                write_with(&path, |w| write_field_csv(w, &rows))?;
                vec![path]
            }
            Job::PatchAverage { n, mode } => {
                let pol = cfg.static_polarizability()?;
                let rows = suppression_curve(n, *mode, &cfg.patch_averaging(), &pol)?;
                let path = dir.join("patch_average.csv");
                write_with(&path, |w| SuppressionRow::write_csv(w, &rows))?;
                vec![path]
            }
            Job::Catalog => {
                let dump = serde_json::json!({
                    "plates": catalog::PLATES.iter().map(|p| catalog::plate(p)).collect::<Result<Vec<_>, _>>()?,
                    "rods": [catalog::silica()],
                    "gaps": [catalog::vacuum()],
                });
                let text = serde_json::to_string_pretty(&dump).expect("catalog serializes");
                println!("{text}");
                let path = dir.join("catalog.json");
                fs::write(&path, text + "\n")?;
                vec![path]
            }
        };
        Ok(JobOutput { files, capture })
    }
}

fn write_with<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Cartesian product with separation outermost; each axis must be monotone.
fn product(d: &[f64], theta: &[f64], temperature: &[f64]) -> Result<Vec<SweepPoint>, CliError> {
    SweepGrid::Separation(d.to_vec()).points(0.0, 0.0, 1.0)?;
    SweepGrid::Angle(theta.to_vec()).points(1.0, 0.0, 1.0)?;
    SweepGrid::Temperature(temperature.to_vec()).points(1.0, 0.0, 1.0)?;
    let mut out = Vec::with_capacity(d.len() * theta.len() * temperature.len());
    for &d in d {
        for &theta in theta {
            for &temperature in temperature {
                out.push(SweepPoint { d, theta, temperature });
            }
        }
    }
    Ok(out)
}

fn casimir_rows(cfg: &RunConfig, points: &[SweepPoint], path: &Path) -> Result<PathBuf, CliError> {
    let solver = cfg.solver()?;
    let rows = lifshitz::sweep(&solver, points).map_err(|e| match &e {
        Error::GridPoint { index, source } => {
            let p = points[*index];
            let context = format!(
                "grid point {index} (d = {:e} m, theta = {} rad, T = {} K): {source}",
                p.d, p.theta, p.temperature
            );
            CliError::from(source.root_cause().clone()).with_context(context)
        }
        _ => CliError::from(e),
    })?;
    write_with(path, |w| lifshitz::write_csv(w, &rows))?;
    Ok(path.to_path_buf())
}
