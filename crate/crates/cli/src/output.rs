use std::path::PathBuf;

use serde::Serialize;

use crate::CliError;

pub const OUT_ENV: &str = "VOLTERRA_OUT";

pub struct Output {
    dir: PathBuf,
    artifacts: Vec<String>,
}

impl Output {
    pub fn new(flag: Option<PathBuf>) -> Result<Self, CliError> {
        let dir = flag
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("volterra-out"));
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Usage(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self { dir, artifacts: Vec::new() })
    }

    pub fn artifacts(&self) -> &[String] {
        &self.artifacts
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Numeric(e.into()))?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).expect("reports serialize");
        self.write(name, &(text + "\n"))
    }

    /// Writes without recording the file as an artifact.
    pub fn json_quiet<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).expect("reports serialize");
        std::fs::write(self.dir.join(name), text + "\n").map_err(|e| CliError::Numeric(e.into()))
    }
}
