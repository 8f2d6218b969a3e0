//! Run manifests: enough to replay a command and reproduce its outputs.

use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<PathBuf>,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    pub tool_version: String,
    /// Arguments after the program name, without worker-count flags.
    pub argv: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            inputs: Vec::new(),
            seed,
            params: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            argv,
        }
    }

    pub fn input(mut self, p: &Path) -> Self {
        self.inputs.push(p.to_path_buf());
        self
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    /// `<output>.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn write_next_to(&self, output: &Path) -> CliResult<PathBuf> {
        let path = Self::path_for(output);
        crate::write_json(&path, self)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
    }
}

/// Drops `--jobs N`, `--jobs=N` and `-j N`: worker count never changes
/// outputs, so replays are free to pick their own.
pub fn strip_jobs(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if a == "--jobs" || a == "-j" {
            skip = true;
            continue;
        }
        if a.starts_with("--jobs=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}
