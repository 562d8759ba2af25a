//! Binary portable graymap (P5) I/O and generic grayscale ingestion.
//!
//! Written files are always 8-bit (`maxval` 255) with a minimal header
//! `P5\n<w> <h>\n255\n`. A pixel value `v` is stored as `round(255 * v)`
//! after clamping to `[0, 1]`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{luma_601, Image};

pub fn quantize(v: f64) -> u8 {
    (255.0 * v.clamp(0.0, 1.0)).round() as u8
}

pub fn encode_pgm(image: &Image) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", image.width(), image.height());
    let mut out = Vec::with_capacity(header.len() + image.data().len());
    out.extend_from_slice(header.as_bytes());
    out.extend(image.data().iter().map(|&v| quantize(v)));
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    let bad = |msg: &str| Error::format("pgm", msg);
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(bad("missing P5 magic"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and '#' comments may separate header tokens
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
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(bad("expected a decimal header field"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("header field out of range"))?;
    }
    // exactly one whitespace byte precedes the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(bad("missing whitespace after maxval"));
    }
    pos += 1;

    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(bad(&format!("unsupported maxval {maxval} (8-bit only)")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| bad("image too large"))?;
    let raster = &bytes[pos..];
    if raster.len() < n {
        return Err(bad(&format!(
            "raster holds {} bytes, expected {n}",
            raster.len()
        )));
    }
    let scale = 1.0 / maxval as f64;
    let data = raster[..n].iter().map(|&b| b as f64 * scale).collect();
    Image::new(width, height, data).map_err(|e| bad(&e.to_string()))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes).map_err(|e| e.at_path(path))
}

pub fn write_pgm(path: impl AsRef<Path>, image: &Image) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(image)).map_err(|e| Error::io(path, e))
}

/// Writes 8-bit grayscale: P5 for `.pgm` (or no extension), otherwise the
/// format implied by the extension.
pub fn save_image(path: impl AsRef<Path>, image: &Image) -> Result<()> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        None => write_pgm(path, image),
        Some(e) if e.eq_ignore_ascii_case("pgm") => write_pgm(path, image),
        Some(_) => {
            let bytes = image.data().iter().map(|&v| quantize(v)).collect();
            let gray =
                image::GrayImage::from_raw(image.width() as u32, image.height() as u32, bytes)
                    .expect("buffer matches dimensions");
            gray.save(path)
                .map_err(|e| Error::format(path.display().to_string(), e.to_string()))
        }
    }
}

/// Loads any supported raster (P5 natively, otherwise PNG/JPEG/BMP/TIFF/PNM
/// via the `image` crate) as grayscale using Rec. 601 luma.
pub fn load_grayscale(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"P5") {
        return decode_pgm(&bytes).map_err(|e| e.at_path(path));
    }
    let decoded = image::load_from_memory(&bytes)
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))?
        .to_rgb8();
    let (w, h) = decoded.dimensions();
    let data = decoded
        .pixels()
        .map(|p| luma_601(p[0], p[1], p[2]))
        .collect();
    Image::new(w as usize, h as usize, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_minimal() {
        let img = Image::new(3, 2, vec![0.0, 0.5, 1.0, 0.2, 0.8, 1.5]).unwrap();
        let bytes = encode_pgm(&img);
        assert_eq!(&bytes[..11], b"P5\n3 2\n255\n");
        assert_eq!(&bytes[11..], &[0, 128, 255, 51, 204, 255]);
    }

    #[test]
    fn decode_handles_comments() {
        let mut bytes = b"P5 # made by hand\n2 1\n# max\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255]);
        let img = decode_pgm(&bytes).unwrap();
        assert_eq!(img.data(), &[0.0, 1.0]);
    }

    #[test]
    fn decode_rejects_garbage() {
        assert!(decode_pgm(b"P6\n1 1\n255\n\0").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\0").is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\0\0").is_err());
        assert!(decode_pgm(b"P5\n1").is_err());
    }

    #[test]
    fn quantized_round_trip_is_stable() {
        let img = Image::from_fn(16, 4, |x, y| ((x * 4 + y) as f64 * 17.0 / 255.0) % 1.0);
        let once = decode_pgm(&encode_pgm(&img)).unwrap();
        let twice = decode_pgm(&encode_pgm(&once)).unwrap();
        assert_eq!(once, twice);
        assert_eq!(encode_pgm(&once), encode_pgm(&img));
    }

    #[test]
    fn read_error_names_path() {
        let err = read_pgm("/nonexistent/frame.pgm").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/frame.pgm"));
    }
}
