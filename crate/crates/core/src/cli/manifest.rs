use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{Command, SCHEMA_VERSION};
use crate::error::Result;

pub const MANIFEST_SCHEMA: &str = "laplace-pin/run-manifest";

/// Record of one command run; `config` alone determines every output file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub schema_version: u32,
    pub artifact_version: String,
    pub command: String,
    pub config: Command,
    pub seed: Option<u64>,
    pub started_unix_seconds: f64,
    pub elapsed_seconds: f64,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(config: Command, seed: Option<u64>, elapsed: Duration, outputs: Vec<String>) -> Self {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        RunManifest {
            schema: MANIFEST_SCHEMA.into(),
            schema_version: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            command: config.name().into(),
            config,
            seed,
            started_unix_seconds: (now.saturating_sub(elapsed)).as_secs_f64(),
            elapsed_seconds: elapsed.as_secs_f64(),
            outputs,
        }
    }

    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.json")
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(Self::file_name(&self.command));
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
