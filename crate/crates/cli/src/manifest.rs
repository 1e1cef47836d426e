use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use stitchkit_core::ArtifactPlan;

use crate::config::ToolkitConfig;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of a batch run. `params` is a valid config file: replaying the run
/// with it and `seed` regenerates every output byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// Degradation category, for `degrade` runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub params: ToolkitConfig,
    pub samples: Vec<SampleRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    /// Source file name relative to the input directory.
    pub source: String,
    pub original_dims: [u32; 2],
    /// Global sample index the per-sample seed is derived from.
    pub index: u64,
    pub seed: u64,
    pub plan: ArtifactPlan,
    pub gt_score: f64,
    pub shortfall: u32,
}

impl Manifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}
