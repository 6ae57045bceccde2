//! Run manifests: what was run, with which inputs, and checksums of every
//! file written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use levitorque_core::constants::CONSTANTS_VERSION;

use crate::config::RunConfig;
use crate::job::Job;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub subcommand: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub constants_version: String,
    pub outputs: Vec<OutputEntry>,
    pub version: String,
    pub job: Job,
    pub config: RunConfig,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String, CliError> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Hash of the resolved job and configuration; the output directory is
/// excluded so relocated reruns hash identically.
pub fn config_hash(job: &Job, config: &RunConfig) -> String {
    let mut c = config.clone();
    c.output_dir = PathBuf::new();
    let text = serde_json::to_string(&(job, &c)).expect("configuration serializes");
    sha256_hex(text.as_bytes())
}

impl Manifest {
    pub fn new(job: &Job, config: &RunConfig, outputs: &[PathBuf]) -> Result<Self, CliError> {
        let entries = outputs
            .iter()
            .map(|p| {
                Ok(OutputEntry {
                    path: p
                        .strip_prefix(&config.output_dir)
                        .unwrap_or(p)
                        .to_string_lossy()
                        .into_owned(),
                    sha256: file_sha256(p)?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Manifest {
            subcommand: job.name().to_string(),
            config_hash: config_hash(job, config),
            seed: job.seed(),
            constants_version: CONSTANTS_VERSION.to_string(),
            outputs: entries,
            version: env!("CARGO_PKG_VERSION").to_string(),
            job: job.clone(),
            config: config.clone(),
        })
    }

    pub fn file_name(subcommand: &str) -> String {
        format!("{subcommand}.manifest.json")
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(Self::file_name(&self.subcommand));
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("malformed manifest {}: {e}", path.display())))
    }
}
