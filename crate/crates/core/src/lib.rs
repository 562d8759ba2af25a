//! Holographic information hiding with block-wise restoration of the hidden
//! image.
//!
//! The pipeline: [`embedding::embed`] superimposes a host image and a faint
//! embedded image recorded at opposite depths; [`embedding::reconstruct`]
//! brings either plane back into focus; the dim embedded reconstruction is
//! tiled by [`dataset::BlockGrid`] and each block is brightened by a small
//! convolutional network ([`nn::Network`]) whose weights come from an HWF1
//! file. [`metrics`] scores the result against the original.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod embedding;
pub mod error;
pub mod holo;
pub mod metrics;
pub mod nn;
pub mod optics;
pub mod pgm;
pub mod raster;
pub mod seed;

pub use error::{Error, Result};
pub use raster::Image;
