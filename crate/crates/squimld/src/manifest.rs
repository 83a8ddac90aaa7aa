use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};

/// Record of one command run, written as a flat JSON object of strings.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub started: String,
    pub finished: String,
    pub output_files: Vec<PathBuf>,
    pub code_version: String,
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &str, workers: usize, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            parameters: Vec::new(),
            seed,
            workers,
            started: now(),
            finished: String::new(),
            output_files: Vec::new(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.parameters.push((key.to_string(), value.to_string()));
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("command".into(), self.command.clone());
        m.insert("seed".into(), self.seed.map(|s| s.to_string()).unwrap_or_default());
        m.insert("workers".into(), self.workers.to_string());
        m.insert("started".into(), self.started.clone());
        m.insert("finished".into(), self.finished.clone());
        m.insert("code_version".into(), self.code_version.clone());
        let files: Vec<String> = self.output_files.iter().map(|p| p.display().to_string()).collect();
        m.insert("output_files".into(), files.join(";"));
        for (k, v) in &self.parameters {
            m.insert(format!("param.{k}"), v.clone());
        }
        m
    }

    /// Stamps `finished` and writes `manifest.json` into `dir`.
    pub fn finish(mut self, dir: &Path) -> Result<PathBuf, crate::CliError> {
        self.finished = now();
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&self.to_map())? + "\n")?;
        Ok(path)
    }
}
