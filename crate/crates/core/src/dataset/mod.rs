//! Training-corpus generation: glyph canvases, hologram synthesis,
//! embed-plane reconstruction, block tiling and the manifest.

mod canvas;
mod generate;
mod grid;
pub mod idx;
pub mod manifest;

pub use canvas::{build_embedded_canvas, EmbeddedCanvasSpec};
pub use generate::{
    generate_dataset, list_glyphs, prepare_host, GenerateOptions, DEFAULT_VAL_FRACTION,
};
pub use grid::{tile, untile, BlockGrid};
pub use manifest::{BlockRecord, DatasetManifest, SampleEntry, Split};
