use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use fpl_core::data::DatasetInfo;
use serde::{Deserialize, Serialize};

use crate::config::Config;

/// Everything needed to rerun an experiment and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub experiment: String,
    pub tool_version: String,
    /// Command line that reproduces every output.
    pub command: String,
    pub preset_note: String,
    pub config: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    pub datasets: Vec<DatasetInfo>,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

impl ExperimentManifest {
    pub fn new(config: &Config, preset_note: &str) -> Self {
        Self {
            experiment: config.experiment().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: config.command_line(),
            preset_note: preset_note.to_string(),
            config: config.values().clone(),
            seeds: BTreeMap::new(),
            datasets: Vec::new(),
            outputs: Vec::new(),
            summary: serde_json::Value::Null,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}
