use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Image;

/// Layout of the embedded image: a `rows x cols` grid of glyphs on an
/// otherwise empty square canvas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddedCanvasSpec {
    pub canvas_size: usize,
    pub glyph_size: usize,
    pub rows: usize,
    pub cols: usize,
    /// Top-left corner of the glyph grid, `(x, y)` pixels.
    pub offset: (usize, usize),
    /// Directory of P5 glyph images.
    pub glyph_source: PathBuf,
}

impl Default for EmbeddedCanvasSpec {
    fn default() -> Self {
        EmbeddedCanvasSpec {
            canvas_size: 2048,
            glyph_size: 128,
            rows: 8,
            cols: 8,
            offset: (0, 0),
            glyph_source: PathBuf::from("glyphs"),
        }
    }
}

impl EmbeddedCanvasSpec {
    pub fn glyph_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.glyph_size == 0 || self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidConfig(
                "glyph size and grid dimensions must be positive".into(),
            ));
        }
        let (ox, oy) = self.offset;
        let right = ox + self.cols * self.glyph_size;
        let bottom = oy + self.rows * self.glyph_size;
        if right > self.canvas_size || bottom > self.canvas_size {
            return Err(Error::InvalidConfig(format!(
                "{}x{} grid of {}px glyphs at ({ox}, {oy}) does not fit a {}px canvas",
                self.rows, self.cols, self.glyph_size, self.canvas_size
            )));
        }
        Ok(())
    }

    /// True for pixels covered by the glyph grid.
    pub fn in_grid(&self, x: usize, y: usize) -> bool {
        let (ox, oy) = self.offset;
        x >= ox
            && y >= oy
            && x < ox + self.cols * self.glyph_size
            && y < oy + self.rows * self.glyph_size
    }
}

/// Resizes each glyph (bilinear) to `glyph_size` and lays them out
/// row-major; everything outside the grid stays zero.
pub fn build_embedded_canvas(spec: &EmbeddedCanvasSpec, glyphs: &[Image]) -> Result<Image> {
    spec.validate()?;
    if glyphs.len() != spec.glyph_count() {
        return Err(Error::InvalidConfig(format!(
            "{}x{} grid needs {} glyphs, got {}",
            spec.rows,
            spec.cols,
            spec.glyph_count(),
            glyphs.len()
        )));
    }
    let mut canvas = Image::zeros(spec.canvas_size, spec.canvas_size);
    let (ox, oy) = spec.offset;
    for (i, glyph) in glyphs.iter().enumerate() {
        let g = glyph
            .resize_bilinear(spec.glyph_size, spec.glyph_size)
            .clamped();
        let x = ox + (i % spec.cols) * spec.glyph_size;
        let y = oy + (i / spec.cols) * spec.glyph_size;
        canvas.paste(&g, x, y)?;
    }
    Ok(canvas)
}
