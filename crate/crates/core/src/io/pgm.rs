//! 16-bit binary graymap (P5, maxval 65535, big-endian samples).

use super::dataset::atomic_write;
use crate::error::{invalid, Error, Result};
use crate::pfa::ComplexImage;
use ndarray::Array2;
use std::path::Path;

pub const FULL_SCALE: u16 = u16::MAX;

/// Magnitude in dB relative to the peak, clipped to `[-dynamic_range_db, 0]`
/// and mapped linearly onto `0..=65535`. An all-zero image maps to black.
pub fn magnitude_levels(img: &ComplexImage, dynamic_range_db: f64) -> Result<Array2<u16>> {
    if !(dynamic_range_db > 0.0 && dynamic_range_db.is_finite()) {
        return invalid("dynamic range must be positive");
    }
    let mag = img.magnitude();
    let peak = mag.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(Array2::zeros(mag.dim()));
    }
    Ok(mag.mapv(|m| {
        let db = if m > 0.0 { 20.0 * (m / peak).log10() } else { f64::NEG_INFINITY };
        let t = ((db + dynamic_range_db) / dynamic_range_db).clamp(0.0, 1.0);
        (t * FULL_SCALE as f64).round() as u16
    }))
}

pub fn encode_pgm(levels: &Array2<u16>) -> Vec<u8> {
    let (rows, cols) = levels.dim();
    let mut out = format!("P5\n{cols} {rows}\n{FULL_SCALE}\n").into_bytes();
    out.reserve(rows * cols * 2);
    for v in levels.iter() {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out
}

pub fn export_magnitude(img: &ComplexImage, path: &Path, dynamic_range_db: f64) -> Result<()> {
    let levels = magnitude_levels(img, dynamic_range_db)?;
    atomic_write(path, &encode_pgm(&levels))
}

fn header_err(msg: &str) -> Error {
    Error::Header(format!("graymap: {msg}"))
}

/// Reads a P5 graymap with maxval 65535.
pub fn read_pgm(path: &Path) -> Result<Array2<u16>> {
    let bytes = std::fs::read(path)?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(header_err("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| header_err("non-ascii header"))?.to_string());
    }
    pos += 1;
    if fields[0] != "P5" {
        return Err(header_err("not a binary graymap"));
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| header_err("bad dimension"));
    let (cols, rows, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
    if maxval != FULL_SCALE as usize {
        return Err(header_err("expected 16-bit samples"));
    }
    let payload = bytes.get(pos..).unwrap_or(&[]);
    let expected = rows * cols * 2;
    if payload.len() != expected {
        return Err(Error::SizeMismatch { expected: expected as u64, found: payload.len() as u64 });
    }
    let data = payload.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
    Array2::from_shape_vec((rows, cols), data).map_err(|e| header_err(&e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfa::{form_image, CartesianGrid, CartesianSpectrum, Taper};
    use num_complex::Complex64;

    fn image() -> ComplexImage {
        let g = CartesianGrid::synthetic(10e9, 1.0, crate::sim::SPEED_OF_LIGHT, 32, 0.2, 24, 0.2);
        let s = CartesianSpectrum::point_targets(&g, &[(0.3, -0.4, Complex64::new(2.0, 0.0))]);
        form_image(&s, Taper::None)
    }

    #[test]
    fn zero_image_is_black() {
        let mut img = image();
        img.data.fill(Complex64::new(0.0, 0.0));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("z.pgm");
        export_magnitude(&img, &p, 40.0).unwrap();
        assert!(read_pgm(&p).unwrap().iter().all(|&v| v == 0));
    }

    #[test]
    fn peak_is_full_scale_and_round_trips() {
        let img = image();
        let levels = magnitude_levels(&img, 40.0).unwrap();
        assert_eq!(levels.iter().max(), Some(&FULL_SCALE));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.pgm");
        export_magnitude(&img, &p, 40.0).unwrap();
        let back = read_pgm(&p).unwrap();
        assert_eq!(back, levels);
        assert_eq!(back.dim(), img.dims());
    }

    #[test]
    fn truncated_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.pgm");
        let mut bytes = encode_pgm(&Array2::from_elem((3, 4), 7u16));
        bytes.pop();
        std::fs::write(&p, bytes).unwrap();
        assert!(matches!(read_pgm(&p), Err(Error::SizeMismatch { .. })));
    }
}
