//! Batch harness around `stitchkit-core`: dataset synthesis, degradation
//! for matcher studies, mask scoring, evaluation and EER.
//!
//! Every command is non-interactive and writes machine-readable JSON. The
//! binary in `main.rs` is a thin clap front end over these functions.

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{
    degrade, eer, evaluate, score, synthesize, DegradeCategory, DegradeOptions, EvaluateOptions, ScoreOptions,
    SynthesizeOptions,
};
pub use config::ToolkitConfig;
pub use manifest::{Manifest, SampleRecord};

/// Error raised for invalid invocations; the binary exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}
