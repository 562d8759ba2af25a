//! Forward-only CNN engine for block restoration.

mod engine;
pub mod ops;
pub mod spec;
mod tensor;
mod weights;

pub use engine::{restore_frame, restore_frame_in_order, Network};
pub use spec::{Architecture, Layer, LayerKind, NetworkSpec, ResnetConfig, UnetConfig};
pub use tensor::Tensor;
pub use weights::{WeightStore, HWF_MAGIC};
