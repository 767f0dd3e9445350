//! File formats: PNG colour images, PFM and raw float depth, label stacks.
//!
//! PNG samples are treated as linear light: a code value `v` maps to
//! `v / max_code` with no transfer curve, and writing rounds back to 16-bit.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};

use crate::error::{Error, Result};
use crate::metrics::LabelStack;
use crate::raster::{DepthMap, Plane, RasterImage};

pub const DEPTH_MAGIC: &[u8; 8] = b"TLDEPTH1";
pub const LABEL_MAGIC: &[u8; 6] = b"TLSEG1";

pub fn decode_png(bytes: &[u8]) -> Result<RasterImage> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let gray = matches!(
        img,
        DynamicImage::ImageLuma8(_)
            | DynamicImage::ImageLumaA8(_)
            | DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
    );
    let wide = matches!(
        img,
        DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
            | DynamicImage::ImageRgb16(_)
            | DynamicImage::ImageRgba16(_)
    );
    let data: Vec<f64> = match (gray, wide) {
        (true, false) => img.to_luma8().into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        (true, true) => img.to_luma16().into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        (false, false) => img.to_rgb8().into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        (false, true) => img.to_rgb16().into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
    };
    RasterImage::new(w, h, if gray { 1 } else { 3 }, data)
}

fn to_u16(v: f64) -> u16 {
    (v.clamp(0.0, 1.0) * 65535.0).round() as u16
}

/// 16-bit PNG; grayscale for one channel, RGB for three.
pub fn encode_png16(image: &RasterImage) -> Result<Vec<u8>> {
    let (w, h) = (image.width() as u32, image.height() as u32);
    let raw: Vec<u16> = image.data().iter().map(|&v| to_u16(v)).collect();
    let dynamic = if image.channels() == 1 {
        DynamicImage::ImageLuma16(
            ImageBuffer::<Luma<u16>, _>::from_raw(w, h, raw).expect("buffer size matches"),
        )
    } else {
        DynamicImage::ImageRgb16(
            ImageBuffer::<Rgb<u16>, _>::from_raw(w, h, raw).expect("buffer size matches"),
        )
    };
    let mut out = Cursor::new(Vec::new());
    dynamic.write_to(&mut out, ImageFormat::Png)?;
    Ok(out.into_inner())
}

pub fn read_png(path: impl AsRef<Path>) -> Result<RasterImage> {
    decode_png(&std::fs::read(path)?)
}

pub fn write_png16(path: impl AsRef<Path>, image: &RasterImage) -> Result<()> {
    std::fs::write(path, encode_png16(image)?)?;
    Ok(())
}

fn pfm_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a str> {
    while bytes.get(*pos).is_some_and(|b| b.is_ascii_whitespace()) {
        *pos += 1;
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::format("PFM", "truncated header"));
    }
    std::str::from_utf8(&bytes[start..*pos]).map_err(|_| Error::format("PFM", "non-ASCII header"))
}

/// Decodes a single-channel (`Pf`) portable float map into top-down rows.
pub fn decode_pfm(bytes: &[u8]) -> Result<Plane> {
    let mut pos = 0;
    let kind = pfm_token(bytes, &mut pos)?;
    match kind {
        "Pf" => {}
        "PF" => return Err(Error::format("PFM", "expected a single-channel `Pf` map, got `PF`")),
        other => return Err(Error::format("PFM", format!("bad magic `{other}`"))),
    }
    let parse_dim = |tok: &str| {
        tok.parse::<usize>()
            .map_err(|_| Error::format("PFM", format!("bad dimension `{tok}`")))
    };
    let w = parse_dim(pfm_token(bytes, &mut pos)?)?;
    let h = parse_dim(pfm_token(bytes, &mut pos)?)?;
    let scale: f64 = pfm_token(bytes, &mut pos)?
        .parse()
        .map_err(|_| Error::format("PFM", "bad scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format("PFM", "scale must be nonzero"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let body = bytes.get(pos..).unwrap_or_default();
    let n = w
        .checked_mul(h)
        .ok_or_else(|| Error::format("PFM", "dimensions overflow"))?;
    if body.len() < n * 4 {
        return Err(Error::format(
            "PFM",
            format!("expected {} raster bytes, found {}", n * 4, body.len()),
        ));
    }
    let little = scale < 0.0;
    let mut data = vec![0.0; n];
    for (i, chunk) in body[..n * 4].chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
        // PFM stores the bottom row first.
        let (x, y) = (i % w, h - 1 - i / w);
        data[y * w + x] = v as f64;
    }
    Plane::new(w, h, data)
}

/// Little-endian `Pf` map with scale -1.0, bottom row first.
pub fn encode_pfm(plane: &Plane) -> Vec<u8> {
    let (w, h) = plane.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for y in (0..h).rev() {
        for x in 0..w {
            out.extend_from_slice(&(plane.get(x, y) as f32).to_le_bytes());
        }
    }
    out
}

/// `TLDEPTH1` + u32 width + u32 height (LE), then row-major LE f32.
pub fn decode_raw_depth(bytes: &[u8]) -> Result<Plane> {
    if bytes.len() < 16 || &bytes[..8] != DEPTH_MAGIC {
        return Err(Error::format("TLDEPTH1", "missing header"));
    }
    let w = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let n = w
        .checked_mul(h)
        .ok_or_else(|| Error::format("TLDEPTH1", "dimensions overflow"))?;
    let body = &bytes[16..];
    if body.len() != n * 4 {
        return Err(Error::format(
            "TLDEPTH1",
            format!("expected {} raster bytes, found {}", n * 4, body.len()),
        ));
    }
    let data = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    Plane::new(w, h, data)
}

pub fn encode_raw_depth(plane: &Plane) -> Vec<u8> {
    let (w, h) = plane.dims();
    let mut out = Vec::with_capacity(16 + w * h * 4);
    out.extend_from_slice(DEPTH_MAGIC);
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    for &v in plane.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

/// Float field from either PFM or `TLDEPTH1` bytes, chosen by magic.
pub fn decode_plane(bytes: &[u8]) -> Result<Plane> {
    if bytes.starts_with(DEPTH_MAGIC) {
        decode_raw_depth(bytes)
    } else {
        decode_pfm(bytes)
    }
}

pub fn decode_depth(bytes: &[u8]) -> Result<DepthMap> {
    DepthMap::from_plane(decode_plane(bytes)?)
}

pub fn read_depth(path: impl AsRef<Path>) -> Result<DepthMap> {
    decode_depth(&std::fs::read(path)?)
}

pub fn read_plane(path: impl AsRef<Path>) -> Result<Plane> {
    decode_plane(&std::fs::read(path)?)
}

/// `TLSEG1` + u32 width + u32 height, then three LE u16 class IDs per pixel.
pub fn decode_label_stack(bytes: &[u8]) -> Result<LabelStack> {
    if bytes.len() < 14 || &bytes[..6] != LABEL_MAGIC {
        return Err(Error::format("TLSEG1", "missing header"));
    }
    let w = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    let body = &bytes[14..];
    let n = w
        .checked_mul(h)
        .ok_or_else(|| Error::format("TLSEG1", "dimensions overflow"))?;
    if body.len() != n * 6 {
        return Err(Error::format(
            "TLSEG1",
            format!("expected {} label bytes, found {}", n * 6, body.len()),
        ));
    }
    let top3 = body
        .chunks_exact(6)
        .map(|c| {
            [
                u16::from_le_bytes([c[0], c[1]]),
                u16::from_le_bytes([c[2], c[3]]),
                u16::from_le_bytes([c[4], c[5]]),
            ]
        })
        .collect();
    LabelStack::new(w, h, top3)
}

pub fn encode_label_stack(stack: &LabelStack) -> Vec<u8> {
    let (w, h) = stack.dims();
    let mut out = Vec::with_capacity(14 + w * h * 6);
    out.extend_from_slice(LABEL_MAGIC);
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    for t in stack.top3() {
        for c in t {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    out
}

pub fn read_label_stack(path: impl AsRef<Path>) -> Result<LabelStack> {
    decode_label_stack(&std::fs::read(path)?)
}
