use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::table::Column;

/// Bumped whenever a CSV layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnDoc {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Written next to every CSV; `command_line` reruns the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub tool_version: String,
    pub schema_version: u32,
    pub seed: u64,
    pub command_line: Vec<String>,
    pub parameters: serde_json::Value,
    pub metadata: serde_json::Value,
    pub columns: Vec<ColumnDoc>,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub wall_clock_seconds: f64,
    pub validation: Validation,
}

impl RunManifest {
    pub fn columns_from(columns: &[Column]) -> Vec<ColumnDoc> {
        columns
            .iter()
            .map(|c| ColumnDoc {
                name: c.name.into(),
                description: c.description.into(),
            })
            .collect()
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
