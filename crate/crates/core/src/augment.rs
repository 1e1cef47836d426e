//! The eight-transform augmentation pipeline applied to clean images before
//! artifact injection.
//!
//! Each transform is included independently with its own probability, the
//! included subset is shuffled uniformly, and the transforms run in that
//! order. Geometric transforms resample back into the input frame and fill
//! uncovered pixels with white (255), the background of a fingerprint scan.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::resize::{round_to_u8, sample_clamped};
use crate::imgcore::{resize_bilinear, GrayImage};

/// Fill value for pixels a geometric transform maps from outside the frame.
pub const BACKGROUND: u8 = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    ResizedCrop,
    HorizontalFlip,
    Rotation,
    Perspective,
    GaussianBlur,
    Solarize,
    Posterize,
    HistogramEqualization,
}

impl Transform {
    pub const ALL: [Transform; 8] = [
        Transform::ResizedCrop,
        Transform::HorizontalFlip,
        Transform::Rotation,
        Transform::Perspective,
        Transform::GaussianBlur,
        Transform::Solarize,
        Transform::Posterize,
        Transform::HistogramEqualization,
    ];
}

/// Per-transform inclusion probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformProbabilities {
    pub resized_crop: f64,
    pub horizontal_flip: f64,
    pub rotation: f64,
    pub perspective: f64,
    pub gaussian_blur: f64,
    pub solarize: f64,
    pub posterize: f64,
    pub histogram_equalization: f64,
}

impl TransformProbabilities {
    pub const fn uniform(p: f64) -> Self {
        Self {
            resized_crop: p,
            horizontal_flip: p,
            rotation: p,
            perspective: p,
            gaussian_blur: p,
            solarize: p,
            posterize: p,
            histogram_equalization: p,
        }
    }

    pub fn get(&self, t: Transform) -> f64 {
        match t {
            Transform::ResizedCrop => self.resized_crop,
            Transform::HorizontalFlip => self.horizontal_flip,
            Transform::Rotation => self.rotation,
            Transform::Perspective => self.perspective,
            Transform::GaussianBlur => self.gaussian_blur,
            Transform::Solarize => self.solarize,
            Transform::Posterize => self.posterize,
            Transform::HistogramEqualization => self.histogram_equalization,
        }
    }

    /// Sets one probability, leaving the others untouched.
    pub fn with(mut self, t: Transform, p: f64) -> Self {
        let slot = match t {
            Transform::ResizedCrop => &mut self.resized_crop,
            Transform::HorizontalFlip => &mut self.horizontal_flip,
            Transform::Rotation => &mut self.rotation,
            Transform::Perspective => &mut self.perspective,
            Transform::GaussianBlur => &mut self.gaussian_blur,
            Transform::Solarize => &mut self.solarize,
            Transform::Posterize => &mut self.posterize,
            Transform::HistogramEqualization => &mut self.histogram_equalization,
        };
        *slot = p;
        self
    }
}

impl Default for TransformProbabilities {
    fn default() -> Self {
        Self::uniform(0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub probabilities: TransformProbabilities,
    /// Rotation angle is drawn uniformly from `[-rotation_degrees, rotation_degrees]`.
    pub rotation_degrees: f64,
    /// Area fraction range of the random crop.
    pub crop_scale: [f64; 2],
    /// Maximum corner displacement, as a fraction of the half image size.
    pub perspective_distortion: f64,
    pub blur_sigma: [f64; 2],
    pub solarize_threshold: u16,
    /// Inclusive range of retained bits for posterization.
    pub posterize_bits: [u8; 2],
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            probabilities: TransformProbabilities::default(),
            rotation_degrees: 15.0,
            crop_scale: [0.7, 1.0],
            perspective_distortion: 0.3,
            blur_sigma: [0.1, 2.0],
            solarize_threshold: 128,
            posterize_bits: [4, 8],
        }
    }
}

impl AugmentConfig {
    /// A configuration that never applies any transform.
    pub fn disabled() -> Self {
        Self { probabilities: TransformProbabilities::uniform(0.0), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for t in Transform::ALL {
            let p = self.probabilities.get(t);
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::arg(format!("probability for {t:?} must lie in [0, 1], got {p}")));
            }
        }
        if !(self.rotation_degrees.is_finite() && self.rotation_degrees >= 0.0) {
            return Err(Error::arg("rotation_degrees must be finite and non-negative"));
        }
        let [lo, hi] = self.crop_scale;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(Error::arg(format!("crop_scale must satisfy 0 < lo <= hi <= 1, got [{lo}, {hi}]")));
        }
        if !(0.0..1.0).contains(&self.perspective_distortion) {
            return Err(Error::arg("perspective_distortion must lie in [0, 1)"));
        }
        let [lo, hi] = self.blur_sigma;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::arg(format!("blur_sigma must satisfy 0 < lo <= hi, got [{lo}, {hi}]")));
        }
        if self.solarize_threshold > 256 {
            return Err(Error::arg("solarize_threshold must lie in [0, 256]"));
        }
        let [lo, hi] = self.posterize_bits;
        if !(1 <= lo && lo <= hi && hi <= 8) {
            return Err(Error::arg(format!("posterize_bits must satisfy 1 <= lo <= hi <= 8, got [{lo}, {hi}]")));
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// Runs the pipeline. Dimensions are preserved.
pub fn apply_augmentations<R: Rng + ?Sized>(img: &GrayImage, cfg: &AugmentConfig, rng: &mut R) -> GrayImage {
    let mut chosen: Vec<Transform> =
        Transform::ALL.into_iter().filter(|&t| rng.gen_bool(cfg.probabilities.get(t).clamp(0.0, 1.0))).collect();
    chosen.shuffle(rng);

    let mut out = img.clone();
    for t in chosen {
        out = apply_transform(&out, t, cfg, rng);
    }
    out
}

/// Applies a single transform, drawing its parameters from `cfg` and `rng`.
pub fn apply_transform<R: Rng + ?Sized>(img: &GrayImage, t: Transform, cfg: &AugmentConfig, rng: &mut R) -> GrayImage {
    match t {
        Transform::ResizedCrop => {
            let scale = uniform(rng, cfg.crop_scale[0], cfg.crop_scale[1]);
            random_resized_crop(img, scale, rng)
        }
        Transform::HorizontalFlip => hflip(img),
        Transform::Rotation => {
            let angle = uniform(rng, -cfg.rotation_degrees, cfg.rotation_degrees);
            rotate(img, angle)
        }
        Transform::Perspective => random_perspective(img, cfg.perspective_distortion, rng),
        Transform::GaussianBlur => {
            let sigma = uniform(rng, cfg.blur_sigma[0], cfg.blur_sigma[1]);
            gaussian_blur(img, sigma)
        }
        Transform::Solarize => solarize(img, cfg.solarize_threshold),
        Transform::Posterize => {
            let [lo, hi] = cfg.posterize_bits;
            let bits = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            posterize(img, bits)
        }
        Transform::HistogramEqualization => equalize_histogram(img),
    }
}

pub fn hflip(img: &GrayImage) -> GrayImage {
    let w = img.width();
    GrayImage::from_fn(w, img.height(), |x, y| img.get(w - 1 - x, y)).expect("same dimensions")
}

/// Bilinear sample with white fill for points outside the pixel footprint of
/// the image. `u`, `v` are index-space coordinates (pixel centers at integers).
fn sample_or_fill(img: &GrayImage, u: f64, v: f64) -> u8 {
    const EPS: f64 = 1e-9;
    let (w, h) = (img.width() as f64, img.height() as f64);
    if !(u >= -0.5 - EPS && u <= w - 0.5 + EPS && v >= -0.5 - EPS && v <= h - 0.5 + EPS) {
        return BACKGROUND;
    }
    round_to_u8(sample_clamped(img, u, v))
}

/// Rotates about the image center; positive angles turn the content
/// counter-clockwise as displayed.
pub fn rotate(img: &GrayImage, angle_degrees: f64) -> GrayImage {
    if angle_degrees == 0.0 || !angle_degrees.is_finite() {
        return img.clone();
    }
    let (sin, cos) = angle_degrees.to_radians().sin_cos();
    let cx = img.width() as f64 / 2.0;
    let cy = img.height() as f64 / 2.0;
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let dx = x as f64 + 0.5 - cx;
        let dy = y as f64 + 0.5 - cy;
        let sx = cx + dx * cos - dy * sin;
        let sy = cy + dx * sin + dy * cos;
        sample_or_fill(img, sx - 0.5, sy - 0.5)
    })
    .expect("same dimensions")
}

/// Crops a uniformly placed window covering about `scale` of the image area
/// (aspect ratio preserved) and resizes it back to the input dimensions.
pub fn random_resized_crop<R: Rng + ?Sized>(img: &GrayImage, scale: f64, rng: &mut R) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let side = scale.clamp(0.0, 1.0).sqrt();
    let cw = ((w as f64 * side).round() as u32).clamp(1, w);
    let ch = ((h as f64 * side).round() as u32).clamp(1, h);
    let x0 = rng.gen_range(0..=w - cw);
    let y0 = rng.gen_range(0..=h - ch);
    if (cw, ch) == (w, h) {
        return img.clone();
    }
    let crop = GrayImage::from_fn(cw, ch, |x, y| img.get(x0 + x, y0 + y)).expect("non-empty crop");
    resize_bilinear(&crop, w, h).expect("non-zero target")
}

/// Jitters each corner inward by up to `distortion` times half the image size
/// and warps the image so the original corners land on the jittered ones.
pub fn random_perspective<R: Rng + ?Sized>(img: &GrayImage, distortion: f64, rng: &mut R) -> GrayImage {
    let (w, h) = (img.width() as f64, img.height() as f64);
    let dx = distortion.max(0.0) * w / 2.0;
    let dy = distortion.max(0.0) * h / 2.0;
    let mut j = |max: f64| rng.gen::<f64>() * max;
    let corners = [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)];
    let jittered = [(j(dx), j(dy)), (w - j(dx), j(dy)), (w - j(dx), h - j(dy)), (j(dx), h - j(dy))];
    if distortion <= 0.0 {
        return img.clone();
    }
    // Inverse mapping: output (jittered frame) back to source corners.
    let Some(hom) = Homography::from_correspondences(&jittered, &corners) else {
        return img.clone();
    };
    GrayImage::from_fn(img.width(), img.height(), |x, y| match hom.apply(x as f64 + 0.5, y as f64 + 0.5) {
        Some((sx, sy)) => sample_or_fill(img, sx - 0.5, sy - 0.5),
        None => BACKGROUND,
    })
    .expect("same dimensions")
}

/// 3x3 projective transform with the last entry fixed to 1.
#[derive(Debug, Clone, Copy)]
struct Homography([f64; 8]);

impl Homography {
    fn from_correspondences(from: &[(f64, f64); 4], to: &[(f64, f64); 4]) -> Option<Self> {
        let mut a = [[0.0f64; 9]; 8];
        for (i, (&(x, y), &(u, v))) in from.iter().zip(to).enumerate() {
            a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -x * u, -y * u, u];
            a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -x * v, -y * v, v];
        }
        solve_augmented(&mut a).map(Homography)
    }

    fn apply(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let h = &self.0;
        let d = h[6] * x + h[7] * y + 1.0;
        if d.abs() < 1e-12 {
            return None;
        }
        Some(((h[0] * x + h[1] * y + h[2]) / d, (h[3] * x + h[4] * y + h[5]) / d))
    }
}

/// Gaussian elimination with partial pivoting on an 8x9 augmented matrix.
fn solve_augmented(a: &mut [[f64; 9]; 8]) -> Option<[f64; 8]> {
    for col in 0..8 {
        let pivot = (col..8).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..8 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (v, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= f * p;
            }
        }
    }
    let mut x = [0.0; 8];
    for row in (0..8).rev() {
        let mut s = a[row][8];
        for k in row + 1..8 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Normalized discrete Gaussian of radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius).map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur with edge-replicated borders.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> GrayImage {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return img.clone();
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let src = img.pixels();

    let mut horiz = vec![0.0f64; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in kernel.iter().enumerate() {
                let sx = (x + i as i64 - radius).clamp(0, w - 1);
                acc += kv * src[(y * w + sx) as usize] as f64;
            }
            horiz[(y * w + x) as usize] = acc;
        }
    }
    let mut out = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in kernel.iter().enumerate() {
                let sy = (y + i as i64 - radius).clamp(0, h - 1);
                acc += kv * horiz[(sy * w + x) as usize];
            }
            out[(y * w + x) as usize] = round_to_u8(acc);
        }
    }
    GrayImage::new(img.width(), img.height(), out).expect("same dimensions")
}

/// Inverts every pixel at or above `threshold`; 256 disables the transform.
pub fn solarize(img: &GrayImage, threshold: u16) -> GrayImage {
    map_pixels(img, |v| if v as u16 >= threshold { 255 - v } else { v })
}

/// Keeps the top `bits` bits of every pixel.
pub fn posterize(img: &GrayImage, bits: u8) -> GrayImage {
    let bits = bits.clamp(1, 8);
    let mask = 0xFFu8 << (8 - bits);
    map_pixels(img, |v| v & mask)
}

/// Cumulative-histogram equalization over 256 bins. Constant images are
/// returned unchanged.
pub fn equalize_histogram(img: &GrayImage) -> GrayImage {
    let mut hist = [0u64; 256];
    for &v in img.pixels() {
        hist[v as usize] += 1;
    }
    let total = img.pixels().len() as u64;
    let cdf_min = hist.iter().copied().find(|&c| c > 0).unwrap_or(0);
    if total == cdf_min {
        return img.clone();
    }
    let mut lut = [0u8; 256];
    let mut cdf = 0u64;
    for (v, &count) in hist.iter().enumerate() {
        cdf += count;
        let scaled = (cdf.saturating_sub(cdf_min)) as f64 / (total - cdf_min) as f64 * 255.0;
        lut[v] = round_to_u8(scaled);
    }
    map_pixels(img, |v| lut[v as usize])
}

fn map_pixels(img: &GrayImage, f: impl Fn(u8) -> u8) -> GrayImage {
    GrayImage::new(img.width(), img.height(), img.pixels().iter().map(|&v| f(v)).collect()).expect("same dimensions")
}
