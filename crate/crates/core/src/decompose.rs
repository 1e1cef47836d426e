//! Connected-component census of a binary mask.
//!
//! Each component is classified by how far its bounding box spans the image:
//! a box covering at least `span_threshold` of the width is a horizontal
//! line, one covering that fraction of the height is a vertical line, and
//! anything else (including boxes spanning both) is a patch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{BinaryMask, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentClass {
    Patch,
    VLine,
    HLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeConfig {
    pub connectivity: Connectivity,
    pub span_threshold: f64,
    /// Components smaller than this fraction of the image area are dropped.
    pub min_area_fraction: f64,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self { connectivity: Connectivity::Eight, span_threshold: 0.9, min_area_fraction: 0.0001 }
    }
}

impl DecomposeConfig {
    /// Keeps every component; used for scoring ground-truth masks.
    pub fn exact() -> Self {
        Self { min_area_fraction: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.span_threshold > 0.0 && self.span_threshold <= 1.0) {
            return Err(Error::arg("span_threshold must lie in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.min_area_fraction) {
            return Err(Error::arg("min_area_fraction must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// An unclassified connected region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Blob {
    pub area: u64,
    pub bbox: Rect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Component {
    pub area: u64,
    pub bbox: Rect,
    pub class: ComponentClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecomposedMask {
    pub width: u32,
    pub height: u32,
    pub components: Vec<Component>,
}

impl DecomposedMask {
    pub fn count(&self, class: ComponentClass) -> usize {
        self.components.iter().filter(|c| c.class == class).count()
    }
}

/// Per-pixel labels (0 = background or discarded, `i + 1` = `blobs[i]`)
/// together with the retained blobs in final order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    pub labels: Vec<u32>,
    pub blobs: Vec<Blob>,
}

/// Labels the mask foreground. Blobs are ordered by bounding-box top-left
/// (row-major), ties broken by the first foreground pixel in scan order.
pub fn label_components(mask: &BinaryMask, cfg: &DecomposeConfig) -> Labeling {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let bits = mask.bits();
    let mut labels = vec![0u32; w * h];
    let mut found: Vec<(usize, Blob)> = Vec::new();
    let mut stack = Vec::new();

    for start in 0..w * h {
        if !bits[start] || labels[start] != 0 {
            continue;
        }
        let label = found.len() as u32 + 1;
        labels[start] = label;
        stack.push(start);
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        let mut area = 0u64;
        while let Some(idx) = stack.pop() {
            let (x, y) = (idx % w, idx / w);
            area += 1;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            for_each_neighbor(x, y, w, h, cfg.connectivity, |n| {
                if bits[n] && labels[n] == 0 {
                    labels[n] = label;
                    stack.push(n);
                }
            });
        }
        let bbox = Rect::new(x0 as u32, y0 as u32, (x1 - x0 + 1) as u32, (y1 - y0 + 1) as u32);
        found.push((start, Blob { area, bbox }));
    }

    let min_area = cfg.min_area_fraction * (w * h) as f64;
    let mut keep: Vec<(usize, u32, Blob)> = found
        .into_iter()
        .enumerate()
        .filter(|(_, (_, b))| b.area as f64 >= min_area)
        .map(|(i, (start, b))| (start, i as u32 + 1, b))
        .collect();
    keep.sort_by_key(|&(start, _, b)| (b.bbox.y, b.bbox.x, start));

    let mut remap = vec![0u32; labels.iter().copied().max().unwrap_or(0) as usize + 1];
    for (new, &(_, old, _)) in keep.iter().enumerate() {
        remap[old as usize] = new as u32 + 1;
    }
    for l in labels.iter_mut() {
        *l = remap[*l as usize];
    }
    Labeling { labels, blobs: keep.into_iter().map(|(_, _, b)| b).collect() }
}

fn for_each_neighbor(x: usize, y: usize, w: usize, h: usize, conn: Connectivity, mut f: impl FnMut(usize)) {
    let xs = x.saturating_sub(1)..=(x + 1).min(w - 1);
    for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
        for nx in xs.clone() {
            if (nx, ny) == (x, y) {
                continue;
            }
            if conn == Connectivity::Four && nx != x && ny != y {
                continue;
            }
            f(ny * w + nx);
        }
    }
}

pub fn connected_components(mask: &BinaryMask, cfg: &DecomposeConfig) -> Vec<Blob> {
    label_components(mask, cfg).blobs
}

pub fn classify_component(blob: &Blob, width: u32, height: u32, cfg: &DecomposeConfig) -> ComponentClass {
    let spans_width = blob.bbox.w as f64 >= cfg.span_threshold * width as f64;
    let spans_height = blob.bbox.h as f64 >= cfg.span_threshold * height as f64;
    match (spans_width, spans_height) {
        (true, false) => ComponentClass::HLine,
        (false, true) => ComponentClass::VLine,
        _ => ComponentClass::Patch,
    }
}

pub fn decompose(mask: &BinaryMask, cfg: &DecomposeConfig) -> DecomposedMask {
    let (width, height) = (mask.width(), mask.height());
    let components = connected_components(mask, cfg)
        .into_iter()
        .map(|b| Component { area: b.area, bbox: b.bbox, class: classify_component(&b, width, height, cfg) })
        .collect();
    DecomposedMask { width, height, components }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_with(w: u32, h: u32, rects: &[Rect]) -> BinaryMask {
        let mut m = BinaryMask::empty(w, h).unwrap();
        for r in rects {
            m.fill_rect(r);
        }
        m
    }

    #[test]
    fn empty_mask_has_no_components() {
        let m = BinaryMask::empty(30, 20).unwrap();
        assert!(connected_components(&m, &DecomposeConfig::default()).is_empty());
        assert!(decompose(&m, &DecomposeConfig::default()).components.is_empty());
    }

    #[test]
    fn two_separate_blocks() {
        let m = mask_with(20, 10, &[Rect::new(1, 1, 3, 3), Rect::new(6, 1, 3, 3)]);
        let blobs = connected_components(&m, &DecomposeConfig::exact());
        assert_eq!(blobs.len(), 2);
        assert!(blobs.iter().all(|b| b.area == 9));
        assert_eq!(blobs[0].bbox, Rect::new(1, 1, 3, 3));
    }

    #[test]
    fn diagonal_touch_depends_on_connectivity() {
        let m = mask_with(4, 4, &[Rect::new(0, 0, 1, 1), Rect::new(1, 1, 1, 1)]);
        let eight = DecomposeConfig::exact();
        let four = DecomposeConfig { connectivity: Connectivity::Four, ..eight };
        assert_eq!(connected_components(&m, &eight).len(), 1);
        assert_eq!(connected_components(&m, &four).len(), 2);
    }

    #[test]
    fn ordering_follows_bbox_top_left() {
        // The L-shaped blob has its first scan pixel at (10,0) but its box
        // starts at x=5, so it sorts after the blob at (2,0).
        let m = mask_with(20, 10, &[Rect::new(10, 0, 1, 5), Rect::new(5, 4, 6, 1), Rect::new(2, 0, 1, 1)]);
        let blobs = connected_components(&m, &DecomposeConfig::exact());
        assert_eq!(blobs.iter().map(|b| b.bbox.x).collect::<Vec<_>>(), vec![2, 5]);
    }

    #[test]
    fn min_area_drops_speckle() {
        let m = mask_with(100, 100, &[Rect::new(0, 0, 1, 1), Rect::new(10, 10, 5, 5)]);
        let cfg = DecomposeConfig { min_area_fraction: 0.001, ..Default::default() };
        let lab = label_components(&m, &cfg);
        assert_eq!(lab.blobs.len(), 1);
        assert_eq!(lab.labels[0], 0);
        assert_eq!(lab.labels[10 * 100 + 10], 1);
    }

    #[test]
    fn classification_rules() {
        let cfg = DecomposeConfig::default();
        let blob = |w, h| Blob { area: 1, bbox: Rect::new(0, 0, w, h) };
        assert_eq!(classify_component(&blob(224, 6), 224, 224, &cfg), ComponentClass::HLine);
        assert_eq!(classify_component(&blob(20, 20), 224, 224, &cfg), ComponentClass::Patch);
        assert_eq!(classify_component(&blob(5, 224), 224, 224, &cfg), ComponentClass::VLine);
        assert_eq!(classify_component(&blob(224, 224), 224, 224, &cfg), ComponentClass::Patch);
        assert_eq!(classify_component(&blob(300, 200), 300, 200, &cfg), ComponentClass::Patch);
        // thick band on a narrow image is still a line
        assert_eq!(classify_component(&blob(64, 71), 64, 1024, &cfg), ComponentClass::HLine);
    }

    #[test]
    fn config_json_uses_numeric_connectivity() {
        let json = serde_json::to_string(&DecomposeConfig::default()).unwrap();
        assert!(json.contains("\"connectivity\":8"), "{json}");
        let cfg: DecomposeConfig = serde_json::from_str(r#"{"connectivity":4}"#).unwrap();
        assert!(serde_json::from_str::<DecomposeConfig>(r#"{"connectivity":6}"#).is_err());
        assert_eq!(cfg.connectivity, Connectivity::Four);
        assert!(DecomposeConfig { span_threshold: 0.0, ..cfg }.validate().is_err());
    }
}
