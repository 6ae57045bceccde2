//! Run configuration: defaults, TOML file, then command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use levitorque_core::dynamics::{PulseSchedule, PulseSetup};
use levitorque_core::lifshitz::{CasimirSolver, CasimirTable, QuadratureSpec, RodGeometry};
use levitorque_core::materials::{catalog, MaterialSet};
use levitorque_core::patch::{PatchAveraging, PatchConfig};
use levitorque_core::sensing::Environment;
use levitorque_core::trap::{polarizability, Polarizability, TrapConfig};

use crate::units::normalize_toml;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialNames {
    pub plate: String,
    pub rod: String,
    pub gap: String,
}

impl Default for MaterialNames {
    fn default() -> Self {
        MaterialNames { plate: "batio3".into(), rod: "silica".into(), gap: "vacuum".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t_end: f64,
    pub feedback_gain: Option<f64>,
    pub timestep: f64,
    pub record_every: usize,
    /// Separation nodes of the precomputed Casimir table.
    pub table_nodes: usize,
    pub table_d_min: f64,
    pub table_d_max: f64,
}

impl Default for PulseSection {
    fn default() -> Self {
        let s = PulseSchedule::default();
        PulseSection {
            t1: s.t1,
            t2: s.t2,
            t3: s.t3,
            t_end: s.t_end,
            feedback_gain: s.feedback_gain,
            timestep: s.timestep,
            record_every: 10,
            table_nodes: CasimirTable::DEFAULT_NODES,
            table_d_min: 100e-9,
            table_d_max: 600e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatchSection {
    pub r0: f64,
    pub v0: f64,
    pub z: f64,
    pub range: f64,
    pub line_y: f64,
    pub scan_1d: usize,
    pub scan_2d: usize,
}

impl Default for PatchSection {
    fn default() -> Self {
        let a = PatchAveraging::default();
        PatchSection {
            r0: a.patch.r0,
            v0: a.patch.v0,
            z: a.z,
            range: a.range,
            line_y: a.line_y,
            scan_1d: a.scan_1d,
            scan_2d: a.scan_2d,
        }
    }
}

/// Fully resolved inputs of one run, all in SI.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub materials: MaterialNames,
    pub rod: RodGeometry,
    pub trap: TrapConfig,
    pub environment: Environment,
    pub quadrature: QuadratureSpec,
    pub pulse: PulseSection,
    pub patch: PatchSection,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig { output_dir: PathBuf::from("out"), ..RunConfig::default() });
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: toml::Value =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        normalize_toml(&mut value);
        let mut cfg: RunConfig = value
            .try_into()
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if cfg.output_dir.as_os_str().is_empty() {
            cfg.output_dir = PathBuf::from("out");
        }
        Ok(cfg)
    }

    pub fn materials(&self) -> Result<MaterialSet, CliError> {
        let m = MaterialSet {
            plate: catalog::plate(&self.materials.plate)?,
            rod: catalog::rod(&self.materials.rod)?,
            gap: catalog::gap(&self.materials.gap)?,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn solver(&self) -> Result<CasimirSolver, CliError> {
        Ok(CasimirSolver::new(self.materials()?, self.rod, self.quadrature.clone())?)
    }

    /// Rod polarizability at the trapping wavelength.
    pub fn optical_polarizability(&self) -> Result<Polarizability, CliError> {
        Ok(polarizability(&self.rod, catalog::rod(&self.materials.rod)?.eps_optical)?)
    }

    /// Rod polarizability in a static field.
    pub fn static_polarizability(&self) -> Result<Polarizability, CliError> {
        Ok(polarizability(&self.rod, catalog::rod(&self.materials.rod)?.eps_static())?)
    }

    pub fn pulse_setup(&self) -> Result<PulseSetup, CliError> {
        let p = &self.pulse;
        Ok(PulseSetup {
            schedule: PulseSchedule {
                t1: p.t1,
                t2: p.t2,
                t3: p.t3,
                t_end: p.t_end,
                feedback_gain: p.feedback_gain,
                timestep: p.timestep,
            },
            trap: self.trap.clone(),
            rod: self.rod,
            eps_optical: catalog::rod(&self.materials.rod)?.eps_optical,
            env: self.environment,
            record_every: p.record_every,
        })
    }

    pub fn patch_averaging(&self) -> PatchAveraging {
        let p = &self.patch;
        PatchAveraging {
            patch: PatchConfig { r0: p.r0, v0: p.v0 },
            z: p.z,
            range: p.range,
            line_y: p.line_y,
            scan_1d: p.scan_1d,
            scan_2d: p.scan_2d,
        }
    }
}
