use crate::error::{Error, Result};

use super::raster::GrayImage;

/// Bilinear resize with half-pixel-center alignment.
///
/// Output pixel `x` samples source coordinate `(x + 0.5) * in_w / out_w - 0.5`,
/// clamped to the valid index range; results are rounded to nearest.
pub fn resize_bilinear(img: &GrayImage, out_w: u32, out_h: u32) -> Result<GrayImage> {
    if out_w == 0 || out_h == 0 {
        return Err(Error::arg(format!("resize target must be positive, got {out_w}x{out_h}")));
    }
    if (out_w, out_h) == (img.width(), img.height()) {
        return Ok(img.clone());
    }
    let sx = img.width() as f64 / out_w as f64;
    let sy = img.height() as f64 / out_h as f64;
    GrayImage::from_fn(out_w, out_h, |x, y| {
        let u = (x as f64 + 0.5) * sx - 0.5;
        let v = (y as f64 + 0.5) * sy - 0.5;
        round_to_u8(sample_clamped(img, u, v))
    })
}

/// Bilinear sample at index-space coordinates, clamped to the border.
pub(crate) fn sample_clamped(img: &GrayImage, u: f64, v: f64) -> f64 {
    let max_x = (img.width() - 1) as f64;
    let max_y = (img.height() - 1) as f64;
    let u = u.clamp(0.0, max_x);
    let v = v.clamp(0.0, max_y);
    let x0 = u.floor();
    let y0 = v.floor();
    let fx = u - x0;
    let fy = v - y0;
    let (x0, y0) = (x0 as u32, y0 as u32);
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let top = img.get(x0, y0) as f64 * (1.0 - fx) + img.get(x1, y0) as f64 * fx;
    let bottom = img.get(x0, y1) as f64 * (1.0 - fx) + img.get(x1, y1) as f64 * fx;
    top * (1.0 - fy) + bottom * fy
}

pub(crate) fn round_to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}
