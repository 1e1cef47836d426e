use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use stitchkit_core::{AugmentConfig, DecomposeConfig, ScoreParams, SynthesisParams};

/// A config file: one JSON document with optional `augment`, `synthesis`,
/// `decompose` and `score` sections. Missing fields take their defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolkitConfig {
    pub augment: AugmentConfig,
    pub synthesis: SynthesisParams,
    pub decompose: DecomposeConfig,
    pub score: ScoreParams,
}

impl ToolkitConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ToolkitConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> anyhow::Result<Self> {
        path.map(Self::load).unwrap_or_else(|| Ok(Self::default()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.augment.validate()?;
        self.synthesis.validate()?;
        self.decompose.validate()?;
        self.score.validate()?;
        Ok(())
    }
}
