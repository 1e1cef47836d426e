//! The mosaicking artifact score and its detection flag.
//!
//! For an `s_w`×`s_h` mask with `n` patch components, `m` vertical-line
//! components and `o` horizontal-line components:
//!
//! ```text
//! S = ( Σn [b·s_w·s_h/100 + w·h] + c·( Σm s_h·w_line + Σo s_w·h_line ) ) · 100 / (s_w·s_h)
//! ```
//!
//! so every patch contributes `b` plus its area as a percentage of the mask,
//! and every line contributes `100·c` times its thickness relative to the
//! image extent across the line.

use serde::{Deserialize, Serialize};

use crate::decompose::{decompose, ComponentClass, DecomposeConfig, DecomposedMask};
use crate::error::{Error, Result};
use crate::imgcore::BinaryMask;

/// How the `w·h` patch term is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchArea {
    #[default]
    BoundingBox,
    /// Raw foreground pixel count; for sensitivity studies.
    Pixels,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreParams {
    /// Patch weight.
    pub b: f64,
    /// Line weight.
    pub c: f64,
    /// Flag cutoff; defaults to `b`.
    pub threshold: Option<f64>,
    pub patch_area: PatchArea,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self { b: 5.0, c: 0.025, threshold: None, patch_area: PatchArea::BoundingBox }
    }
}

impl ScoreParams {
    pub fn threshold(&self) -> f64 {
        self.threshold.unwrap_or(self.b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::arg("patch weight b must be positive"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::arg("line weight c must be positive"));
        }
        if self.threshold().is_nan() || self.threshold() <= 0.0 {
            return Err(Error::arg("threshold must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentScore {
    pub class: ComponentClass,
    /// `[x, y, w, h]`
    pub bbox: [u32; 4],
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub score: f64,
    pub flagged: bool,
    pub n: usize,
    pub m: usize,
    pub o: usize,
    pub components: Vec<ComponentScore>,
}

pub fn compute_score(d: &DecomposedMask, p: &ScoreParams) -> ScoreReport {
    let sw = d.width as f64;
    let sh = d.height as f64;
    let image_area = sw * sh;
    let b_patch = p.b * image_area / 100.0;

    let mut patch_sum = 0.0;
    let mut vline_sum = 0.0;
    let mut hline_sum = 0.0;
    let (mut n, mut m, mut o) = (0, 0, 0);
    let mut components = Vec::with_capacity(d.components.len());
    for comp in &d.components {
        let contribution = match comp.class {
            ComponentClass::Patch => {
                n += 1;
                let area = match p.patch_area {
                    PatchArea::BoundingBox => comp.bbox.area(),
                    PatchArea::Pixels => comp.area,
                } as f64;
                patch_sum += b_patch + area;
                p.b + 100.0 * area / image_area
            }
            ComponentClass::VLine => {
                m += 1;
                let w_line = comp.bbox.w as f64;
                vline_sum += sh * w_line;
                100.0 * p.c * w_line / sw
            }
            ComponentClass::HLine => {
                o += 1;
                let h_line = comp.bbox.h as f64;
                hline_sum += sw * h_line;
                100.0 * p.c * h_line / sh
            }
        };
        components.push(ComponentScore { class: comp.class, bbox: comp.bbox.to_array(), contribution });
    }
    let score = (patch_sum + p.c * (vline_sum + hline_sum)) * 100.0 / image_area;
    ScoreReport { score, flagged: score >= p.threshold(), n, m, o, components }
}

pub fn score_mask(mask: &BinaryMask, dcfg: &DecomposeConfig, p: &ScoreParams) -> ScoreReport {
    compute_score(&decompose(mask, dcfg), p)
}
