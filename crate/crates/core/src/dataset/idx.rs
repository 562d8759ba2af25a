//! Conversion of IDX image archives (the handwritten-digit distribution
//! format) into a directory of P5 glyphs.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pgm;
use crate::raster::Image;

const IDX_U8_RANK3: u32 = 0x0000_0803;

/// Decodes an uncompressed `idx3-ubyte` buffer into images scaled to `[0, 1]`.
pub fn decode_idx_images(bytes: &[u8]) -> Result<Vec<Image>> {
    let bad = |msg: String| Error::format("idx", msg);
    if bytes.len() < 16 {
        return Err(bad("truncated header".into()));
    }
    let word = |i: usize| u32::from_be_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    if word(0) != IDX_U8_RANK3 {
        if bytes.starts_with(&[0x1f, 0x8b]) {
            return Err(bad("archive is gzip-compressed; decompress it first".into()));
        }
        return Err(bad(format!(
            "magic {:#010x} is not an unsigned-byte rank-3 array",
            word(0)
        )));
    }
    let (count, rows, cols) = (word(1) as usize, word(2) as usize, word(3) as usize);
    let size = rows * cols;
    let body = &bytes[16..];
    if size == 0 || body.len() != count * size {
        return Err(bad(format!(
            "{count} images of {rows}x{cols} need {} bytes, found {}",
            count * size,
            body.len()
        )));
    }
    body.chunks_exact(size)
        .map(|c| Image::new(cols, rows, c.iter().map(|&b| b as f64 / 255.0).collect()))
        .collect()
}

/// Writes the first `limit` images (all when `None`) as
/// `glyph_00000.pgm`, `glyph_00001.pgm`, ... and returns how many were
/// written.
pub fn ingest_idx(archive: &Path, out_dir: &Path, limit: Option<usize>) -> Result<usize> {
    let bytes = fs::read(archive).map_err(|e| Error::io(archive, e))?;
    let images = decode_idx_images(&bytes).map_err(|e| e.at_path(archive))?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let n = limit.map_or(images.len(), |l| l.min(images.len()));
    for (i, img) in images.iter().take(n).enumerate() {
        pgm::write_pgm(out_dir.join(format!("glyph_{i:05}.pgm")), img)?;
    }
    Ok(n)
}
