//! Self-supervised artifact synthesis.
//!
//! A sampled [`ArtifactPlan`] describes either up to four displaced patches
//! or up to four co-axial seam lines. Applying the plan corrupts the image
//! and yields the ground-truth mask; the plan itself is the exact record of
//! every sampled integer and doubles as ground truth for the score.
//!
//! All fraction-to-pixel conversions round toward zero with a floor of one
//! pixel. Elements are kept at least [`SynthesisParams::separation`] pixels
//! apart so that ground-truth components stay distinct under 8-connectivity.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{apply_augmentations, AugmentConfig};
use crate::error::{Error, Result};
use crate::imgcore::{resize_bilinear, BinaryMask, GrayImage, Rect};
use crate::score::ScoreParams;
use crate::TRAINING_SIZE;

/// Smallest image side on which artifacts are sampled.
pub const MIN_IMAGE_SIDE: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Seam runs along a row; the shift is vertical.
    Horizontal,
    /// Seam runs along a column; the shift is horizontal.
    Vertical,
}

/// A rectangle whose content is replaced by the content `(dx, dy)` away.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatchSpec {
    pub rect: Rect,
    pub dx: i32,
    pub dy: i32,
}

impl PatchSpec {
    pub fn source(&self) -> (i64, i64, i64, i64) {
        (
            self.rect.x as i64 + self.dx as i64,
            self.rect.y as i64 + self.dy as i64,
            self.rect.w as i64,
            self.rect.h as i64,
        )
    }

    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        if self.dx == 0 && self.dy == 0 {
            return Err(Error::arg("patch offset must be nonzero"));
        }
        if !self.rect.fits_in(width, height) {
            return Err(Error::arg(format!("patch {:?} exceeds {width}x{height} image", self.rect)));
        }
        let (sx, sy, sw, sh) = self.source();
        if sx < 0 || sy < 0 || sx + sw > width as i64 || sy + sh > height as i64 {
            return Err(Error::arg(format!(
                "patch source region ({sx},{sy},{sw},{sh}) lies outside the {width}x{height} image"
            )));
        }
        Ok(())
    }
}

/// A seam at `coord` with the content beyond it displaced by `shift` pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LineSpec {
    pub axis: Axis,
    pub coord: u32,
    pub shift: i32,
}

impl LineSpec {
    pub fn thickness(&self) -> u32 {
        self.shift.unsigned_abs()
    }

    /// The full-span band `[coord, coord + |shift|)` marked in the mask.
    pub fn band(&self, width: u32, height: u32) -> Rect {
        match self.axis {
            Axis::Horizontal => Rect::new(0, self.coord, width, self.thickness()),
            Axis::Vertical => Rect::new(self.coord, 0, self.thickness(), height),
        }
    }

    fn extent(&self, width: u32, height: u32) -> u32 {
        match self.axis {
            Axis::Horizontal => height,
            Axis::Vertical => width,
        }
    }

    /// The band and the band it copies from (shifted by `-shift`) must both
    /// lie inside the image.
    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        if self.shift == 0 {
            return Err(Error::arg("line shift must be nonzero"));
        }
        let extent = self.extent(width, height) as i64;
        let t = self.thickness() as i64;
        let start = self.coord as i64;
        let src = start - self.shift as i64;
        if start + t > extent || src < 0 || src + t > extent {
            return Err(Error::arg(format!(
                "line {:?} at {} with shift {} does not fit a {width}x{height} image",
                self.axis, self.coord, self.shift
            )));
        }
        Ok(())
    }

    fn transposed(&self) -> LineSpec {
        let axis = match self.axis {
            Axis::Horizontal => Axis::Vertical,
            Axis::Vertical => Axis::Horizontal,
        };
        LineSpec { axis, ..*self }
    }
}

/// How a seam line displaces content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineMode {
    /// Only the band is rewritten: it receives the `|shift|` rows (columns)
    /// on the far side of the seam, so every pixel outside the band is kept.
    #[default]
    Band,
    /// Everything beyond the seam moves by `shift`. The band receives the
    /// duplicated rows before the seam; vacated rows at the image edge are
    /// filled by edge replication.
    HalfPlane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanKind {
    Patch,
    Line,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArtifactPlan {
    pub kind: PlanKind,
    pub patches: Vec<PatchSpec>,
    pub lines: Vec<LineSpec>,
    /// Number of elements drawn before placement.
    pub requested: u32,
    /// Elements that could not be placed within the attempt budget.
    pub shortfall: u32,
}

impl ArtifactPlan {
    pub fn empty(kind: PlanKind) -> Self {
        Self { kind, patches: Vec::new(), lines: Vec::new(), requested: 0, shortfall: 0 }
    }

    pub fn len(&self) -> usize {
        self.patches.len() + self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mask rectangles in plan order.
    pub fn regions(&self, width: u32, height: u32) -> Vec<Rect> {
        self.patches.iter().map(|p| p.rect).chain(self.lines.iter().map(|l| l.band(width, height))).collect()
    }

    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        match self.kind {
            PlanKind::Patch if !self.lines.is_empty() => return Err(Error::arg("patch plan carries lines")),
            PlanKind::Line if !self.patches.is_empty() => return Err(Error::arg("line plan carries patches")),
            _ => {}
        }
        for p in &self.patches {
            p.validate(width, height)?;
        }
        for l in &self.lines {
            l.validate(width, height)?;
        }
        if let Some(first) = self.lines.first() {
            if self.lines.iter().any(|l| l.axis != first.axis) {
                return Err(Error::arg("line plan mixes horizontal and vertical seams"));
            }
        }
        let regions = self.regions(width, height);
        for (i, a) in regions.iter().enumerate() {
            if regions[i + 1..].iter().any(|b| a.intersects(b)) {
                return Err(Error::arg("plan elements overlap"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisParams {
    /// Patch side as a fraction of the matching image dimension.
    pub patch_size_range: [f64; 2],
    /// Patch offset and line shift as a fraction of the image dimension.
    pub offset_range: [f64; 2],
    pub max_repetitions: u32,
    pub line_probability: f64,
    /// Doubles both fraction ranges.
    pub warmup: bool,
    pub max_attempts: u32,
    pub line_mode: LineMode,
    /// Minimum background gap in pixels between plan elements.
    pub separation: u32,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        Self {
            patch_size_range: [0.05, 0.15],
            offset_range: [0.02, 0.07],
            max_repetitions: 4,
            line_probability: 0.25,
            warmup: false,
            max_attempts: 100,
            line_mode: LineMode::Band,
            separation: 1,
        }
    }
}

impl SynthesisParams {
    pub fn warmup() -> Self {
        Self { warmup: true, ..Self::default() }
    }

    fn factor(&self) -> f64 {
        if self.warmup {
            2.0
        } else {
            1.0
        }
    }

    pub fn effective_patch_size_range(&self) -> [f64; 2] {
        self.patch_size_range.map(|v| v * self.factor())
    }

    pub fn effective_offset_range(&self) -> [f64; 2] {
        self.offset_range.map(|v| v * self.factor())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, range, eff) in [
            ("patch_size_range", self.patch_size_range, self.effective_patch_size_range()),
            ("offset_range", self.offset_range, self.effective_offset_range()),
        ] {
            let [lo, hi] = range;
            if !(lo > 0.0 && lo <= hi && hi < 1.0) {
                return Err(Error::arg(format!("{name} must satisfy 0 < lo <= hi < 1, got [{lo}, {hi}]")));
            }
            if eff[1] >= 1.0 {
                return Err(Error::arg(format!("{name} doubled for warm-up reaches {}", eff[1])));
            }
        }
        if self.max_repetitions == 0 {
            return Err(Error::arg("max_repetitions must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.line_probability) {
            return Err(Error::arg("line_probability must lie in [0, 1]"));
        }
        if self.max_attempts == 0 {
            return Err(Error::arg("max_attempts must be at least 1"));
        }
        Ok(())
    }
}

/// Inclusive pixel range `[max(1, floor(lo·dim)), max(1, floor(hi·dim))]`.
///
/// A small epsilon absorbs representation error so that fractions landing
/// exactly on an integer (0.29 · 100) are not rounded one pixel short.
pub fn pixel_range(fractions: [f64; 2], dim: u32) -> (u32, u32) {
    let conv = |f: f64| ((f * dim as f64 + 1e-9).floor() as u32).max(1);
    (conv(fractions[0]), conv(fractions[1]))
}

fn sign<R: Rng + ?Sized>(rng: &mut R) -> i32 {
    if rng.gen_bool(0.5) {
        1
    } else {
        -1
    }
}

fn separated(a: &Rect, b: &Rect, gap: u32) -> bool {
    let g = gap as i64;
    let (ax0, ay0) = (a.x as i64 - g, a.y as i64 - g);
    let (ax1, ay1) = (a.right() as i64 + g, a.bottom() as i64 + g);
    !(ax0 < b.right() as i64 && (b.x as i64) < ax1 && ay0 < b.bottom() as i64 && (b.y as i64) < ay1)
}

/// Samples an artifact plan for a `width`×`height` image.
pub fn sample_artifact_plan<R: Rng + ?Sized>(
    width: u32,
    height: u32,
    params: &SynthesisParams,
    rng: &mut R,
) -> Result<ArtifactPlan> {
    params.validate()?;
    if width < MIN_IMAGE_SIDE || height < MIN_IMAGE_SIDE {
        return Err(Error::Synthesis(format!(
            "image {width}x{height} is smaller than the {MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE} minimum"
        )));
    }
    let line_mode = rng.gen_bool(params.line_probability);
    let requested = rng.gen_range(1..=params.max_repetitions);
    let plan = if line_mode {
        sample_lines(width, height, params, requested, rng)
    } else {
        sample_patches(width, height, params, requested, rng)
    };
    if plan.is_empty() {
        return Err(Error::Synthesis(format!("could not place any artifact in a {width}x{height} image")));
    }
    Ok(plan)
}

fn sample_patches<R: Rng + ?Sized>(
    width: u32,
    height: u32,
    params: &SynthesisParams,
    requested: u32,
    rng: &mut R,
) -> ArtifactPlan {
    let size = params.effective_patch_size_range();
    let offset = params.effective_offset_range();
    let (w_lo, w_hi) = pixel_range(size, width);
    let (h_lo, h_hi) = pixel_range(size, height);
    let (ox_lo, ox_hi) = pixel_range(offset, width);
    let (oy_lo, oy_hi) = pixel_range(offset, height);

    let mut plan = ArtifactPlan::empty(PlanKind::Patch);
    plan.requested = requested;
    for _ in 0..requested {
        for _ in 0..params.max_attempts {
            let w = rng.gen_range(w_lo..=w_hi);
            let h = rng.gen_range(h_lo..=h_hi);
            let dx = sign(rng) * rng.gen_range(ox_lo..=ox_hi) as i32;
            let dy = sign(rng) * rng.gen_range(oy_lo..=oy_hi) as i32;
            let Some(x) = place(rng, width, w, dx) else { continue };
            let Some(y) = place(rng, height, h, dy) else { continue };
            let rect = Rect::new(x, y, w, h);
            if plan.patches.iter().all(|p| separated(&p.rect, &rect, params.separation)) {
                plan.patches.push(PatchSpec { rect, dx, dy });
                break;
            }
        }
    }
    plan.shortfall = requested - plan.patches.len() as u32;
    plan
}

/// Uniform start position so that both `[start, start+len)` and the same span
/// shifted by `offset` stay within `[0, extent)`.
fn place<R: Rng + ?Sized>(rng: &mut R, extent: u32, len: u32, offset: i32) -> Option<u32> {
    let lo = (-(offset as i64)).max(0);
    let hi = extent as i64 - len as i64 - (offset as i64).max(0);
    (lo <= hi).then(|| rng.gen_range(lo..=hi) as u32)
}

fn sample_lines<R: Rng + ?Sized>(
    width: u32,
    height: u32,
    params: &SynthesisParams,
    requested: u32,
    rng: &mut R,
) -> ArtifactPlan {
    let axis = if rng.gen_bool(0.5) { Axis::Horizontal } else { Axis::Vertical };
    let extent = match axis {
        Axis::Horizontal => height,
        Axis::Vertical => width,
    };
    let (t_lo, t_hi) = pixel_range(params.effective_offset_range(), extent);

    let mut plan = ArtifactPlan::empty(PlanKind::Line);
    plan.requested = requested;
    for _ in 0..requested {
        for _ in 0..params.max_attempts {
            let t = rng.gen_range(t_lo..=t_hi);
            let shift = sign(rng) * t as i32;
            // band [c, c+t) and its source [c-shift, c-shift+t) inside [0, extent)
            let (lo, hi) =
                if shift > 0 { (t as i64, extent as i64 - t as i64) } else { (0, extent as i64 - 2 * t as i64) };
            if lo > hi {
                continue;
            }
            let coord = rng.gen_range(lo..=hi) as u32;
            let line = LineSpec { axis, coord, shift };
            let band = line.band(width, height);
            if plan.lines.iter().all(|l| separated(&l.band(width, height), &band, params.separation)) {
                plan.lines.push(line);
                break;
            }
        }
    }
    plan.shortfall = requested - plan.lines.len() as u32;
    plan
}

/// Replaces `spec.rect` with the content at `rect + (dx, dy)`. The mask is
/// exactly the rectangle.
pub fn inject_patch(img: &GrayImage, spec: &PatchSpec) -> Result<(GrayImage, BinaryMask)> {
    spec.validate(img.width(), img.height())?;
    let mut out = img.clone();
    copy_patch(img, &mut out, spec);
    let mut mask = BinaryMask::empty(img.width(), img.height())?;
    mask.fill_rect(&spec.rect);
    Ok((out, mask))
}

fn copy_patch(src: &GrayImage, dst: &mut GrayImage, spec: &PatchSpec) {
    let r = spec.rect;
    for y in r.y..r.bottom() {
        let sy = (y as i64 + spec.dy as i64) as u32;
        for x in r.x..r.right() {
            let sx = (x as i64 + spec.dx as i64) as u32;
            dst.set(x, y, src.get(sx, sy));
        }
    }
}

/// Shifts content across a seam line. The mask is the full-span band of
/// thickness `|shift|` starting at the seam.
pub fn inject_line(img: &GrayImage, spec: &LineSpec, mode: LineMode) -> Result<(GrayImage, BinaryMask)> {
    spec.validate(img.width(), img.height())?;
    let out = match spec.axis {
        Axis::Horizontal => shift_rows(img, spec, mode),
        Axis::Vertical => shift_rows(&img.transpose(), &spec.transposed(), mode).transpose(),
    };
    let mut mask = BinaryMask::empty(img.width(), img.height())?;
    mask.fill_rect(&spec.band(img.width(), img.height()));
    Ok((out, mask))
}

fn shift_rows(img: &GrayImage, spec: &LineSpec, mode: LineMode) -> GrayImage {
    let h = img.height() as i64;
    let y0 = spec.coord as i64;
    let d = spec.shift as i64;
    let end = match mode {
        LineMode::Band => y0 + d.abs(),
        LineMode::HalfPlane => h,
    };
    let w = img.width() as usize;
    let mut pixels = img.pixels().to_vec();
    for y in y0..end {
        let src = (y - d).clamp(0, h - 1) as usize;
        let y = y as usize;
        pixels[y * w..(y + 1) * w].copy_from_slice(img.row(src as u32));
    }
    GrayImage::new(img.width(), img.height(), pixels).expect("same dimensions")
}

/// Applies every element of `plan` in order; the mask is the union.
pub fn apply_plan(img: &GrayImage, plan: &ArtifactPlan, mode: LineMode) -> Result<(GrayImage, BinaryMask)> {
    let mut out = img.clone();
    let mut mask = BinaryMask::empty(img.width(), img.height())?;
    for p in &plan.patches {
        let (next, m) = inject_patch(&out, p)?;
        out = next;
        mask.union_with(&m)?;
    }
    for l in &plan.lines {
        let (next, m) = inject_line(&out, l, mode)?;
        out = next;
        mask.union_with(&m)?;
    }
    Ok((out, mask))
}

/// Closed-form score of a plan: every patch adds `b` plus its area as a
/// percentage of the image; every line adds `100·c·|shift|` over the image
/// extent perpendicular to the seam.
pub fn analytic_score(plan: &ArtifactPlan, width: u32, height: u32, params: &ScoreParams) -> f64 {
    let image_area = width as f64 * height as f64;
    let patches: f64 = plan.patches.iter().map(|p| params.b + 100.0 * p.rect.area() as f64 / image_area).sum();
    let lines: f64 = plan
        .lines
        .iter()
        .map(|l| {
            let extent = match l.axis {
                Axis::Horizontal => height,
                Axis::Vertical => width,
            };
            100.0 * params.c * l.thickness() as f64 / extent as f64
        })
        .sum();
    patches + lines
}

/// One synthesized training sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    /// The augmented source the artifacts were injected into.
    pub augmented: GrayImage,
    pub image: GrayImage,
    pub mask: BinaryMask,
    pub plan: ArtifactPlan,
}

/// Resize to the training frame, augment, sample a plan, inject.
pub fn synthesize_sample<R: Rng + ?Sized>(
    img: &GrayImage,
    params: &SynthesisParams,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<Synthesized> {
    let resized = resize_bilinear(img, TRAINING_SIZE, TRAINING_SIZE)?;
    corrupt(&resized, params, cfg, rng)
}

/// Augment, sample and inject at the input resolution.
pub fn corrupt<R: Rng + ?Sized>(
    img: &GrayImage,
    params: &SynthesisParams,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<Synthesized> {
    params.validate()?;
    cfg.validate()?;
    let augmented = apply_augmentations(img, cfg, rng);
    let plan = sample_artifact_plan(augmented.width(), augmented.height(), params, rng)?;
    let (image, mask) = apply_plan(&augmented, &plan, params.line_mode)?;
    Ok(Synthesized { augmented, image, mask, plan })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::sample_rng;

    fn ramp_x(n: u32) -> GrayImage {
        GrayImage::from_fn(n, n, |x, _| x as u8).unwrap()
    }

    #[test]
    fn pixel_range_rounds_toward_zero() {
        assert_eq!(pixel_range([0.05, 0.15], 224), (11, 33));
        assert_eq!(pixel_range([0.02, 0.07], 224), (4, 15));
        assert_eq!(pixel_range([0.10, 0.30], 224), (22, 67));
        assert_eq!(pixel_range([0.04, 0.14], 224), (8, 31));
        assert_eq!(pixel_range([0.01, 0.02], 1000), (10, 20));
        assert_eq!(pixel_range([0.01, 0.02], 1500), (15, 30));
        assert_eq!(pixel_range([0.29, 0.29], 100), (29, 29));
        assert_eq!(pixel_range([0.01, 0.02], 16), (1, 1));
    }

    #[test]
    fn params_validation() {
        SynthesisParams::default().validate().unwrap();
        SynthesisParams::warmup().validate().unwrap();
        let bad = SynthesisParams { patch_size_range: [0.2, 0.1], ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SynthesisParams { line_probability: -0.1, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SynthesisParams { patch_size_range: [0.3, 0.6], warmup: true, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn tiny_image_is_rejected() {
        let err = sample_artifact_plan(15, 100, &SynthesisParams::default(), &mut sample_rng(0, 0));
        assert!(matches!(err, Err(Error::Synthesis(_))));
    }

    #[test]
    fn minimum_image_still_gets_a_plan() {
        for i in 0..200 {
            let plan = sample_artifact_plan(16, 16, &SynthesisParams::default(), &mut sample_rng(7, i)).unwrap();
            plan.validate(16, 16).unwrap();
            assert_eq!(plan.len() as u32 + plan.shortfall, plan.requested);
        }
    }

    #[test]
    fn patch_on_constant_image_changes_nothing() {
        let img = GrayImage::filled(50, 50, 99).unwrap();
        let spec = PatchSpec { rect: Rect::new(10, 10, 8, 6), dx: 3, dy: -4 };
        let (out, mask) = inject_patch(&img, &spec).unwrap();
        assert_eq!(out, img);
        assert_eq!(mask.count(), 48);
        assert!(mask.get(10, 10) && mask.get(17, 15) && !mask.get(18, 15));
    }

    #[test]
    fn patch_on_ramp_traces_displacement() {
        let img = ramp_x(100);
        let spec = PatchSpec { rect: Rect::new(20, 20, 10, 10), dx: 5, dy: 0 };
        let (out, _) = inject_patch(&img, &spec).unwrap();
        for y in 0..100 {
            for x in 0..100 {
                let expect = if spec.rect.contains(x, y) { x + 5 } else { x };
                assert_eq!(out.get(x, y) as u32, expect);
            }
        }
    }

    #[test]
    fn patch_with_source_out_of_bounds_is_rejected() {
        let img = ramp_x(100);
        let spec = PatchSpec { rect: Rect::new(0, 0, 10, 10), dx: -5, dy: 0 };
        assert!(matches!(inject_patch(&img, &spec), Err(Error::InvalidArgument(_))));
        let spec = PatchSpec { rect: Rect::new(0, 0, 10, 10), dx: 0, dy: 0 };
        assert!(inject_patch(&img, &spec).is_err());
    }

    #[test]
    fn line_on_constant_image_changes_nothing() {
        let img = GrayImage::filled(40, 30, 12).unwrap();
        for mode in [LineMode::Band, LineMode::HalfPlane] {
            let spec = LineSpec { axis: Axis::Horizontal, coord: 10, shift: 3 };
            let (out, mask) = inject_line(&img, &spec, mode).unwrap();
            assert_eq!(out, img);
            assert_eq!(mask.count(), 3 * 40);
            assert!((0..40).all(|x| mask.get(x, 10) && mask.get(x, 12) && !mask.get(x, 13) && !mask.get(x, 9)));
        }
    }

    #[test]
    fn half_plane_line_on_ramp() {
        let img = GrayImage::from_fn(100, 100, |_, y| y as u8).unwrap();
        let spec = LineSpec { axis: Axis::Horizontal, coord: 50, shift: 5 };
        let (out, mask) = inject_line(&img, &spec, LineMode::HalfPlane).unwrap();
        for y in 0..100 {
            let expect = if y < 50 { y } else { y - 5 };
            assert!((0..100).all(|x| out.get(x, y) as u32 == expect), "row {y}");
            assert!((0..100).all(|x| mask.get(x, y) == (50..55).contains(&y)));
        }
    }

    #[test]
    fn half_plane_negative_shift_replicates_edge() {
        let img = GrayImage::from_fn(10, 20, |_, y| y as u8).unwrap();
        let spec = LineSpec { axis: Axis::Horizontal, coord: 5, shift: -3 };
        let (out, _) = inject_line(&img, &spec, LineMode::HalfPlane).unwrap();
        let col: Vec<u8> = (0..20).map(|y| out.get(0, y)).collect();
        assert_eq!(col, vec![0, 1, 2, 3, 4, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 19, 19, 19]);
    }

    #[test]
    fn band_line_on_ramp() {
        let img = GrayImage::from_fn(100, 100, |_, y| y as u8).unwrap();
        let spec = LineSpec { axis: Axis::Horizontal, coord: 50, shift: 5 };
        let (out, _) = inject_line(&img, &spec, LineMode::Band).unwrap();
        for y in 0..100 {
            let expect = if (50..55).contains(&y) { y - 5 } else { y };
            assert!((0..100).all(|x| out.get(x, y) as u32 == expect), "row {y}");
        }
        let spec = LineSpec { axis: Axis::Horizontal, coord: 50, shift: -5 };
        let (out, _) = inject_line(&img, &spec, LineMode::Band).unwrap();
        for y in 0..100 {
            let expect = if (50..55).contains(&y) { y + 5 } else { y };
            assert!((0..100).all(|x| out.get(x, y) as u32 == expect), "row {y}");
        }
    }

    #[test]
    fn vertical_line_is_transpose_of_horizontal() {
        let img = GrayImage::from_fn(37, 29, |x, y| ((x * 7 + y * 3) % 251) as u8).unwrap();
        for mode in [LineMode::Band, LineMode::HalfPlane] {
            let v = LineSpec { axis: Axis::Vertical, coord: 12, shift: -4 };
            let h = LineSpec { axis: Axis::Horizontal, coord: 12, shift: -4 };
            let (vo, vm) = inject_line(&img, &v, mode).unwrap();
            let (ho, hm) = inject_line(&img.transpose(), &h, mode).unwrap();
            assert_eq!(vo, ho.transpose());
            assert_eq!(vm, hm.transpose());
        }
    }

    #[test]
    fn line_out_of_bounds_is_rejected() {
        let img = GrayImage::filled(20, 20, 0).unwrap();
        let bad = [
            LineSpec { axis: Axis::Horizontal, coord: 18, shift: -3 },
            LineSpec { axis: Axis::Horizontal, coord: 2, shift: 3 },
            LineSpec { axis: Axis::Vertical, coord: 0, shift: 0 },
            LineSpec { axis: Axis::Vertical, coord: 19, shift: 2 },
        ];
        for spec in bad {
            assert!(inject_line(&img, &spec, LineMode::Band).is_err(), "{spec:?}");
        }
    }

    #[test]
    fn analytic_score_worked_values() {
        let p = ScoreParams::default();
        assert_eq!(analytic_score(&ArtifactPlan::empty(PlanKind::Patch), 224, 224, &p), 0.0);

        let mut plan = ArtifactPlan::empty(PlanKind::Patch);
        plan.patches.push(PatchSpec { rect: Rect::new(10, 10, 20, 20), dx: 5, dy: 5 });
        let expect = 5.0 + 100.0 * 400.0 / 50176.0;
        assert!((analytic_score(&plan, 224, 224, &p) - expect).abs() < 1e-12);
        assert!((analytic_score(&plan, 224, 224, &p) - 5.797_193_877_551_02).abs() < 1e-9);

        let mut plan = ArtifactPlan::empty(PlanKind::Patch);
        plan.patches.push(PatchSpec { rect: Rect::new(10, 10, 10, 10), dx: 5, dy: 5 });
        plan.patches.push(PatchSpec { rect: Rect::new(50, 50, 10, 10), dx: 5, dy: 5 });
        assert!((analytic_score(&plan, 100, 100, &p) - 12.0).abs() < 1e-12);

        let mut plan = ArtifactPlan::empty(PlanKind::Line);
        plan.lines.push(LineSpec { axis: Axis::Vertical, coord: 100, shift: 5 });
        assert!((analytic_score(&plan, 224, 224, &p) - 100.0 * 0.025 * 5.0 / 224.0).abs() < 1e-12);
    }

    #[test]
    fn forced_single_patch() {
        let params = SynthesisParams { line_probability: 0.0, max_repetitions: 1, ..Default::default() };
        let img = GrayImage::from_fn(300, 200, |x, y| ((x ^ y) & 0xFF) as u8).unwrap();
        let s = synthesize_sample(&img, &params, &AugmentConfig::default(), &mut sample_rng(3, 3)).unwrap();
        assert_eq!(s.plan.kind, PlanKind::Patch);
        assert_eq!(s.plan.patches.len(), 1);
        assert_eq!(s.mask.count(), s.plan.patches[0].rect.area());
        assert_eq!((s.image.width(), s.image.height()), (224, 224));
    }

    #[test]
    fn synthesis_is_deterministic() {
        let img = GrayImage::from_fn(180, 240, |x, y| ((x * 3 + y * 5) & 0xFF) as u8).unwrap();
        let a = synthesize_sample(&img, &SynthesisParams::default(), &AugmentConfig::default(), &mut sample_rng(11, 4));
        let b = synthesize_sample(&img, &SynthesisParams::default(), &AugmentConfig::default(), &mut sample_rng(11, 4));
        assert_eq!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn plan_round_trips_through_json() {
        let plan = sample_artifact_plan(224, 224, &SynthesisParams::default(), &mut sample_rng(1, 1)).unwrap();
        let json = serde_json::to_string(&plan).unwrap();
        let back: ArtifactPlan = serde_json::from_str(&json).unwrap();
        assert_eq!(back, plan);
    }
}
