//! Run manifests: one JSON file next to every artifact the CLI writes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Wall-clock seconds per phase; left out of reproducibility checks.
#[derive(Debug, Default, Serialize)]
pub struct Timings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub build: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: BTreeMap<String, serde_json::Value>,
    pub seed: Option<u64>,
    /// sha256 of every input file, keyed by the path as given.
    pub input_hashes: BTreeMap<String, String>,
    pub tool_version: String,
    pub timings: Timings,
    pub outputs: Vec<OutputFile>,
    /// Command specific facts worth echoing (weights, fleet size, ...).
    pub details: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `dir/name.ext` -> `dir/name.<suffix>`; `name.model3.cost.mps` keeps its inner dots.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            arguments: BTreeMap::new(),
            seed: None,
            input_hashes: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timings: Timings::default(),
            outputs: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn arg(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.arguments.insert(key.to_string(), serde_json::to_value(value).expect("argument serializes"));
        self
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.details.insert(key.to_string(), serde_json::to_value(value).expect("detail serializes"));
        self
    }

    /// Reads an input file and records its hash.
    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.input_hashes.insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    /// Writes an output file and records its hash.
    pub fn write_output(&mut self, path: &Path, contents: &str) -> Result<()> {
        fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.push(OutputFile { path: path.display().to_string(), sha256: sha256_hex(contents.as_bytes()) });
        Ok(())
    }

    /// Writes `<primary>.manifest.json` and returns its path.
    pub fn finish(&self, primary: &Path) -> Result<PathBuf> {
        let mut name = primary.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

/// Runs `f` and stores its duration in `slot`.
pub fn timed<T>(slot: &mut Option<f64>, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *slot = Some(start.elapsed().as_secs_f64());
    out
}
