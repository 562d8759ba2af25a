use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Image;

/// Partition of a square frame into non-overlapping square blocks, indexed
/// row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockGrid {
    frame_size: usize,
    block_size: usize,
}

impl BlockGrid {
    pub fn new(frame_size: usize, block_size: usize) -> Result<Self> {
        if block_size == 0 || frame_size == 0 || !frame_size.is_multiple_of(block_size) {
            return Err(Error::DimensionMismatch(format!(
                "frame size {frame_size} is not a positive multiple of block size {block_size}"
            )));
        }
        Ok(BlockGrid {
            frame_size,
            block_size,
        })
    }

    pub fn frame_size(&self) -> usize {
        self.frame_size
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn blocks_per_side(&self) -> usize {
        self.frame_size / self.block_size
    }

    pub fn block_count(&self) -> usize {
        self.blocks_per_side() * self.blocks_per_side()
    }

    /// Top-left pixel of block `index`.
    pub fn origin(&self, index: usize) -> (usize, usize) {
        let n = self.blocks_per_side();
        ((index % n) * self.block_size, (index / n) * self.block_size)
    }

    pub fn block(&self, frame: &Image, index: usize) -> Result<Image> {
        self.check_frame(frame)?;
        if index >= self.block_count() {
            return Err(Error::DimensionMismatch(format!(
                "block index {index} out of range ({} blocks)",
                self.block_count()
            )));
        }
        let (x, y) = self.origin(index);
        frame.crop(x, y, self.block_size, self.block_size)
    }

    fn check_frame(&self, frame: &Image) -> Result<()> {
        if frame.dims() != (self.frame_size, self.frame_size) {
            return Err(Error::DimensionMismatch(format!(
                "expected a {0}x{0} frame, got {1}x{2}",
                self.frame_size,
                frame.width(),
                frame.height()
            )));
        }
        Ok(())
    }
}

pub fn tile(frame: &Image, grid: &BlockGrid) -> Result<Vec<Image>> {
    grid.check_frame(frame)?;
    (0..grid.block_count())
        .map(|i| grid.block(frame, i))
        .collect()
}

pub fn untile(blocks: &[Image], grid: &BlockGrid) -> Result<Image> {
    if blocks.len() != grid.block_count() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} blocks, got {}",
            grid.block_count(),
            blocks.len()
        )));
    }
    let mut frame = Image::zeros(grid.frame_size, grid.frame_size);
    for (i, b) in blocks.iter().enumerate() {
        if b.dims() != (grid.block_size, grid.block_size) {
            return Err(Error::DimensionMismatch(format!(
                "block {i} is {}x{}, expected {1}x{1}",
                b.width(),
                grid.block_size
            )));
        }
        let (x, y) = grid.origin(i);
        frame.paste(b, x, y)?;
    }
    Ok(frame)
}
