//! Output files and their JSON provenance sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

/// Writes into the configured output directory; every data file gets a
/// `<stem>.meta.json` sidecar holding the resolved configuration.
pub struct ArtifactWriter<'a> {
    dir: PathBuf,
    command: &'a str,
    config: &'a RunConfig,
    written: Vec<PathBuf>,
}

impl<'a> ArtifactWriter<'a> {
    pub fn new(command: &'a str, config: &'a RunConfig) -> Result<Self, CliError> {
        let dir = config.output_dir.clone();
        fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        Ok(Self {
            dir,
            command,
            config,
            written: Vec::new(),
        })
    }

    fn provenance(&self, file: &str, summary: Value) -> Value {
        json!({
            "file": file,
            "command": self.command,
            "generator": concat!("upblock ", env!("CARGO_PKG_VERSION")),
            "config": self.config,
            "model_params_rad_per_ns": self.config.params(),
            "summary": summary,
        })
    }

    /// Writes a CSV file and its sidecar.
    pub fn csv(&mut self, name: &str, contents: &str, summary: Value) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        let stem = Path::new(name).file_stem().and_then(|s| s.to_str()).unwrap_or(name);
        let side = self.dir.join(format!("{stem}.meta.json"));
        write_json(&side, &self.provenance(name, summary))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes a JSON result with the provenance block embedded.
    pub fn json(&mut self, name: &str, result: Value) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut doc = self.provenance(name, Value::Null);
        doc["result"] = result;
        write_json(&path, &doc)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}
