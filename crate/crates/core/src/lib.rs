//! Fingerprint mosaicking-artifact toolkit.
//!
//! The crate covers two directions of the same problem:
//!
//! 1. **Synthesis**: augment clean fingerprint images and inject patch or
//!    line mosaicking artifacts, emitting a pixel-exact ground-truth mask and
//!    the sampled [`ArtifactPlan`] that produced it.
//! 2. **Assessment**: decompose any binary artifact mask into patch and line
//!    components, compute the mosaicking artifact score, and evaluate
//!    predicted masks against ground truth (pixel metrics, mean score
//!    difference, equal error rate).
//!
//! All operations are pure functions of their inputs plus an explicit random
//! stream, so batch runs are reproducible independently of scheduling.

pub mod augment;
pub mod decompose;
pub mod error;
pub mod imgcore;
pub mod inject;
pub mod metrics;
pub mod score;
pub mod seed;

pub use augment::{apply_augmentations, AugmentConfig};
pub use decompose::{decompose, Component, ComponentClass, Connectivity, DecomposeConfig, DecomposedMask};
pub use error::{Error, Result};
pub use imgcore::{load_image, load_mask, resize_bilinear, save_image, save_mask, BinaryMask, GrayImage, Rect};
pub use inject::{
    analytic_score, inject_line, inject_patch, sample_artifact_plan, synthesize_sample, ArtifactPlan, Axis, LineMode,
    LineSpec, PatchSpec, PlanKind, SynthesisParams,
};
pub use metrics::{
    compute_eer, confusion_counts, dataset_report, mean_score_difference, ConfusionCounts, MetricsReport,
};
pub use score::{compute_score, score_mask, ScoreParams, ScoreReport};

/// Side length of the square frame every training sample is resized to.
pub const TRAINING_SIZE: u32 = 224;
