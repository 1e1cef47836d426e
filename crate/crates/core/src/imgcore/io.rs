//! PNG and binary PGM (P5) reading and writing.
//!
//! Images are decoded to exact 8-bit intensities. Color inputs are converted
//! with integer luma weights `(77 R + 151 G + 28 B) >> 8`; alpha is dropped.
//! Masks are stored as 0 (background) / 255 (artifact) and any nonzero value
//! reads back as `true`.

use std::fs;
use std::io::{Cursor, ErrorKind};
use std::path::Path;

use crate::error::{Error, Result};

use super::raster::{BinaryMask, GrayImage};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let bytes = fs::read(path.as_ref())?;
    decode_image(&bytes)
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    load_image(path).map(|img| BinaryMask::from_gray(&img))
}

/// Writes PGM when the extension is `.pgm`, PNG otherwise.
pub fn save_image(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_pgm = path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("pgm"));
    let bytes = if is_pgm { encode_pgm(img) } else { encode_png(img)? };
    fs::write(path, bytes)?;
    Ok(())
}

pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    save_image(&mask.to_gray(), path)
}

pub fn decode_mask(bytes: &[u8]) -> Result<BinaryMask> {
    decode_image(bytes).map(|img| BinaryMask::from_gray(&img))
}

pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.len() < 2 {
        Err(unexpected_eof("file too short to identify"))
    } else {
        Err(Error::format("expected PNG or binary PGM (P5)"))
    }
}

fn decode_png(bytes: &[u8]) -> Result<GrayImage> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_error)?;
    if reader.info().bit_depth == png::BitDepth::Sixteen {
        return Err(Error::format("16-bit PNG is not supported"));
    }
    let size = reader.output_buffer_size().ok_or_else(|| Error::format("PNG dimensions too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(png_error)?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::format(format!("unsupported PNG bit depth {:?}", info.bit_depth)));
    }
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => return Err(Error::format("palette was not expanded")),
    };
    let (w, h) = (info.width as usize, info.height as usize);
    let mut pixels = Vec::with_capacity(w * h);
    for row in buf.chunks(info.line_size).take(h) {
        for px in row[..w * channels].chunks_exact(channels) {
            pixels.push(match channels {
                1 | 2 => px[0],
                _ => luma(px[0], px[1], px[2]),
            });
        }
    }
    GrayImage::new(info.width, info.height, pixels)
}

fn luma(r: u8, g: u8, b: u8) -> u8 {
    ((77 * r as u32 + 151 * g as u32 + 28 * b as u32) >> 8) as u8
}

fn png_error(err: png::DecodingError) -> Error {
    match err {
        png::DecodingError::IoError(e) => Error::Io(e),
        other => Error::format(other.to_string()),
    }
}

fn unexpected_eof(msg: &str) -> Error {
    Error::Io(std::io::Error::new(ErrorKind::UnexpectedEof, msg.to_string()))
}

/// Parses a binary PGM. Samples with maxval below 255 are rescaled to the
/// full 8-bit range.
fn decode_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        *field = pgm_header_number(bytes, &mut pos)?;
    }
    let [width, height, maxval] = fields;
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() {
        return Err(unexpected_eof("PGM header ends before raster data"));
    }
    if !bytes[pos].is_ascii_whitespace() {
        return Err(Error::format("malformed PGM header"));
    }
    pos += 1;
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(format!("unsupported PGM maxval {maxval} (8-bit only)")));
    }
    if width == 0 || height == 0 {
        return Err(Error::format("PGM with zero dimension"));
    }
    let len = width as usize * height as usize;
    let raster = &bytes[pos..];
    if raster.len() < len {
        return Err(unexpected_eof(&format!("PGM raster truncated: {} of {len} bytes", raster.len())));
    }
    let raster = &raster[..len];
    let pixels = if maxval == 255 {
        raster.to_vec()
    } else {
        raster.iter().map(|&v| ((v.min(maxval as u8) as u32 * 255 + maxval / 2) / maxval) as u8).collect()
    };
    GrayImage::new(width, height, pixels)
}

fn pgm_header_number(bytes: &[u8], pos: &mut usize) -> Result<u32> {
    loop {
        match bytes.get(*pos) {
            None => return Err(unexpected_eof("PGM header truncated")),
            Some(b'#') => {
                while let Some(&c) = bytes.get(*pos) {
                    *pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            }
            Some(c) if c.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::format("malformed PGM header"));
    }
    if *pos == bytes.len() {
        return Err(unexpected_eof("PGM header truncated"));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format("PGM header value out of range"))
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn encode_png(img: &GrayImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width(), img.height());
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(encoding_error)?;
        writer.write_image_data(img.pixels()).map_err(encoding_error)?;
        writer.finish().map_err(encoding_error)?;
    }
    Ok(out)
}

fn encoding_error(err: png::EncodingError) -> Error {
    match err {
        png::EncodingError::IoError(e) => Error::Io(e),
        other => Error::format(other.to_string()),
    }
}
