//! Binary greymap (P5) reading and writing, 8 and 16 bits per sample.

use std::fs;
use std::path::Path;

use mlcs_core::operators::Image2D;

use crate::error::{HarnessError, Result};

/// Decodes a P5 greymap, normalizing samples to `[0, 1]` by `maxval`.
pub fn decode(bytes: &[u8], path: &Path) -> Result<Image2D> {
    let bad = |reason: &str| HarnessError::format(path, reason);
    let mut pos = 0;
    let mut token = || -> Result<&[u8]> {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(bad("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
            pos += 1;
        }
        Ok(&bytes[start..pos])
    };
    if token()? != b"P5" {
        return Err(bad("not a binary greymap (P5)"));
    }
    let mut number = |what: &str| -> Result<usize> {
        let t = token()?;
        std::str::from_utf8(t)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&v| v > 0)
            .ok_or_else(|| HarnessError::format(path, format!("invalid {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval > 65535 {
        return Err(bad("maxval above 65535"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(bad("missing separator after maxval"));
    }
    let raster = &bytes[pos + 1..];
    let wide = maxval > 255;
    let need = width * height * if wide { 2 } else { 1 };
    if raster.len() < need {
        return Err(bad("raster shorter than width x height"));
    }
    let scale = 1.0 / maxval as f64;
    let data: Vec<f64> = if wide {
        raster[..need].chunks_exact(2).map(|p| u16::from_be_bytes([p[0], p[1]]) as f64 * scale).collect()
    } else {
        raster[..need].iter().map(|&b| b as f64 * scale).collect()
    };
    if data.iter().any(|&v| v > 1.0) {
        return Err(bad("sample exceeds maxval"));
    }
    Ok(Image2D::new(width, height, data)?)
}

/// Encodes `img` (clamped to `[0, 1]`) with the given `maxval`.
pub fn encode(img: &Image2D, maxval: u16) -> Vec<u8> {
    let maxval = maxval.max(1);
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    let q = |v: f64| (v.clamp(0.0, 1.0) * maxval as f64).round() as u16;
    if maxval > 255 {
        out.extend(img.data().iter().flat_map(|&v| q(v).to_be_bytes()));
    } else {
        out.extend(img.data().iter().map(|&v| q(v) as u8));
    }
    out
}

pub fn load_pgm(path: &Path) -> Result<Image2D> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    decode(&bytes, path)
}

pub fn save_pgm(img: &Image2D, path: &Path, maxval: u16) -> Result<()> {
    fs::write(path, encode(img, maxval)).map_err(|e| HarnessError::io(path, e))
}
