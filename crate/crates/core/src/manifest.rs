//! Provenance record written next to every output file.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub flags: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: Option<u64>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl RunManifest {
    pub fn start(subcommand: &str, flags: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.to_owned(),
            flags,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            started_unix_ms: now_ms(),
            finished_unix_ms: None,
        }
    }

    pub fn finish(mut self) -> Self {
        self.finished_unix_ms = Some(now_ms());
        self
    }

    /// `<output>.manifest.json`
    pub fn sidecar_path(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write_sidecar(&self, output: &Path) -> Result<PathBuf> {
        let path = Self::sidecar_path(output);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }
}
