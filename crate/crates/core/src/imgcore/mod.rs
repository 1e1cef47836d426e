//! Raster types, image/mask file I/O and the fixed-size preprocessing resize.

mod io;
mod raster;
pub(crate) mod resize;

pub use io::{decode_image, decode_mask, encode_pgm, encode_png, load_image, load_mask, save_image, save_mask};
pub use raster::{BinaryMask, GrayImage, Rect};
pub use resize::resize_bilinear;
