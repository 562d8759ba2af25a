//! Network architecture description (the JSON sidecar next to an HWF1 file).
//!
//! A network is an ordered list of named layers. Each layer reads from the
//! layers named in `inputs`; an empty list means "the previous layer" (or the
//! network input for the first layer), and the reserved name `input` refers
//! to the network input. The last layer is the output.
//!
//! Parameter tensors are named `<layer>.<param>`:
//!
//! | layer        | params                                                     |
//! |--------------|------------------------------------------------------------|
//! | `conv`       | `weight (F, C, k, k)`, `bias (F)`                          |
//! | `batch_norm` | `gamma`, `beta`, `running_mean`, `running_var` `(C)`, `epsilon (1)` |

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEC_FORMAT: &str = "hologlyph-net/1";
pub const INPUT: &str = "input";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Unet,
    Resnet,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerKind {
    Conv {
        filters: usize,
        kernel: usize,
    },
    BatchNorm,
    Relu,
    MaxPool2x2,
    Upsample2xNearest,
    /// `[decoder, skip]`, stacked in that order.
    ConcatSkip,
    /// Elementwise sum of two equally shaped inputs.
    ResidualAdd,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    #[serde(flatten)]
    pub kind: LayerKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub format: String,
    pub architecture: Architecture,
    pub input_channels: usize,
    /// Spatial size the network is validated (and trained) at.
    pub block_size: usize,
    pub layers: Vec<Layer>,
}

/// `(channels, height, width)`.
pub type Shape = (usize, usize, usize);

/// Expected parameter tensor, in spec order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSpec {
    pub layer: String,
    pub name: String,
    pub shape: Vec<usize>,
}

pub const BN_PARAMS: [&str; 5] = ["gamma", "beta", "running_mean", "running_var", "epsilon"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnetConfig {
    /// Filters of each encoder level; one 2x2 pooling per level.
    pub widths: Vec<usize>,
    pub bottleneck: usize,
    pub kernel: usize,
}

impl Default for UnetConfig {
    fn default() -> Self {
        UnetConfig {
            widths: vec![32, 64],
            bottleneck: 128,
            kernel: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResnetConfig {
    pub filters: usize,
    pub modules: usize,
    pub kernel: usize,
}

impl Default for ResnetConfig {
    fn default() -> Self {
        ResnetConfig {
            filters: 32,
            modules: 4,
            kernel: 3,
        }
    }
}

struct Builder {
    layers: Vec<Layer>,
}

impl Builder {
    fn push(&mut self, name: impl Into<String>, kind: LayerKind, inputs: &[&str]) -> String {
        let name = name.into();
        self.layers.push(Layer {
            name: name.clone(),
            kind,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
        });
        name
    }

    /// `[batch_norm -> conv -> relu] x 2`; returns the last layer name.
    fn block(&mut self, prefix: &str, filters: usize, kernel: usize) -> String {
        let mut last = String::new();
        for j in 1..=2 {
            self.push(format!("{prefix}.bn{j}"), LayerKind::BatchNorm, &[]);
            self.push(
                format!("{prefix}.conv{j}"),
                LayerKind::Conv { filters, kernel },
                &[],
            );
            last = self.push(format!("{prefix}.relu{j}"), LayerKind::Relu, &[]);
        }
        last
    }

    fn output(&mut self) {
        self.push(
            "out",
            LayerKind::Conv {
                filters: 1,
                kernel: 1,
            },
            &[],
        );
    }
}

impl NetworkSpec {
    pub fn unet(cfg: &UnetConfig, block_size: usize) -> Self {
        let mut b = Builder { layers: Vec::new() };
        let mut skips = Vec::new();
        for (lvl, &f) in cfg.widths.iter().enumerate() {
            let name = format!("enc{}", lvl + 1);
            skips.push(b.block(&name, f, cfg.kernel));
            b.push(format!("pool{}", lvl + 1), LayerKind::MaxPool2x2, &[]);
        }
        b.block("bottleneck", cfg.bottleneck, cfg.kernel);
        for (lvl, &f) in cfg.widths.iter().enumerate().rev() {
            let n = lvl + 1;
            let up = b.push(format!("up{n}"), LayerKind::Upsample2xNearest, &[]);
            b.push(
                format!("cat{n}"),
                LayerKind::ConcatSkip,
                &[&up, &skips[lvl]],
            );
            b.block(&format!("dec{n}"), f, cfg.kernel);
        }
        b.output();
        NetworkSpec {
            format: SPEC_FORMAT.into(),
            architecture: Architecture::Unet,
            input_channels: 1,
            block_size,
            layers: b.layers,
        }
    }

    pub fn resnet(cfg: &ResnetConfig, block_size: usize) -> Self {
        let mut b = Builder { layers: Vec::new() };
        b.push(
            "stem.conv",
            LayerKind::Conv {
                filters: cfg.filters,
                kernel: cfg.kernel,
            },
            &[],
        );
        let mut skip = b.push("stem.relu", LayerKind::Relu, &[]);
        for m in 1..=cfg.modules {
            let p = format!("a{m}");
            b.push(format!("{p}.bn"), LayerKind::BatchNorm, &[]);
            let body = b.block(&format!("{p}.block"), cfg.filters, cfg.kernel);
            skip = b.push(format!("{p}.add"), LayerKind::ResidualAdd, &[&skip, &body]);
        }
        b.output();
        NetworkSpec {
            format: SPEC_FORMAT.into(),
            architecture: Architecture::Resnet,
            input_channels: 1,
            block_size,
            layers: b.layers,
        }
    }

    pub fn default_unet() -> Self {
        Self::unet(&UnetConfig::default(), 128)
    }

    pub fn default_resnet() -> Self {
        Self::resnet(&ResnetConfig::default(), 128)
    }

    /// Resolved input indices per layer; `None` stands for the network input.
    pub(crate) fn resolve_inputs(&self) -> Result<Vec<Vec<Option<usize>>>> {
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut resolved = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let fail = |msg: String| Error::Weights {
                layer: layer.name.clone(),
                msg,
            };
            if layer.name.is_empty() || layer.name == INPUT {
                return Err(fail("reserved or empty layer name".into()));
            }
            let ins = if layer.inputs.is_empty() {
                vec![i.checked_sub(1)]
            } else {
                layer
                    .inputs
                    .iter()
                    .map(|n| {
                        if n == INPUT {
                            Ok(None)
                        } else {
                            index
                                .get(n.as_str())
                                .map(|&j| Some(j))
                                .ok_or_else(|| fail(format!("input `{n}` is not an earlier layer")))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            let arity = match layer.kind {
                LayerKind::ConcatSkip | LayerKind::ResidualAdd => 2,
                _ => 1,
            };
            if ins.len() != arity {
                return Err(fail(format!("expects {arity} input(s), got {}", ins.len())));
            }
            if index.insert(&layer.name, i).is_some() {
                return Err(fail("duplicate layer name".into()));
            }
            resolved.push(ins);
        }
        Ok(resolved)
    }

    /// Structural validation and shape inference at `block_size`; returns
    /// each layer's output shape.
    pub fn infer_shapes(&self) -> Result<Vec<Shape>> {
        let spec_err = |msg: String| Error::Weights {
            layer: "<spec>".into(),
            msg,
        };
        if self.format != SPEC_FORMAT {
            return Err(spec_err(format!(
                "unsupported format `{}` (expected `{SPEC_FORMAT}`)",
                self.format
            )));
        }
        if self.layers.is_empty() || self.input_channels == 0 || self.block_size == 0 {
            return Err(spec_err("empty network, input or block size".into()));
        }
        let inputs = self.resolve_inputs()?;
        let input_shape = (self.input_channels, self.block_size, self.block_size);
        let mut shapes: Vec<Shape> = Vec::with_capacity(self.layers.len());
        for (layer, ins) in self.layers.iter().zip(&inputs) {
            let fail = |msg: String| Error::Weights {
                layer: layer.name.clone(),
                msg,
            };
            let src: Vec<Shape> = ins
                .iter()
                .map(|i| i.map_or(input_shape, |j| shapes[j]))
                .collect();
            let (c, h, w) = src[0];
            let shape = match &layer.kind {
                LayerKind::Conv { filters, kernel } => {
                    if *filters == 0 || kernel % 2 == 0 {
                        return Err(fail(format!(
                            "conv needs filters > 0 and an odd kernel, got {filters} / {kernel}"
                        )));
                    }
                    (*filters, h, w)
                }
                LayerKind::BatchNorm | LayerKind::Relu => (c, h, w),
                LayerKind::MaxPool2x2 => {
                    if h % 2 != 0 || w % 2 != 0 {
                        return Err(fail(format!("cannot pool odd spatial size {h}x{w}")));
                    }
                    (c, h / 2, w / 2)
                }
                LayerKind::Upsample2xNearest => (c, 2 * h, 2 * w),
                LayerKind::ConcatSkip => {
                    let (c2, h2, w2) = src[1];
                    if (h, w) != (h2, w2) {
                        return Err(fail(format!(
                            "skip spatial size {h2}x{w2} differs from {h}x{w}"
                        )));
                    }
                    (c + c2, h, w)
                }
                LayerKind::ResidualAdd => {
                    if src[0] != src[1] {
                        return Err(fail(format!(
                            "shortcut shapes differ: {:?} vs {:?}",
                            src[0], src[1]
                        )));
                    }
                    src[0]
                }
            };
            shapes.push(shape);
        }

        let last = self.layers.last().unwrap();
        if shapes.last().unwrap().0 != 1 {
            return Err(spec_err(format!(
                "output layer `{}` must produce one channel",
                last.name
            )));
        }
        if self.architecture == Architecture::Unet {
            if last.kind
                != (LayerKind::Conv {
                    filters: 1,
                    kernel: 1,
                })
            {
                return Err(spec_err(format!(
                    "U-Net output layer `{}` must be a 1x1 conv with one filter",
                    last.name
                )));
            }
            let count = |k: &LayerKind| self.layers.iter().filter(|l| &l.kind == k).count();
            let pools = count(&LayerKind::MaxPool2x2);
            let skips = count(&LayerKind::ConcatSkip);
            if pools != skips {
                return Err(spec_err(format!(
                    "U-Net has {pools} pooling levels but {skips} skip connections"
                )));
            }
        }
        Ok(shapes)
    }

    /// Every parameter tensor the spec requires, in layer order.
    pub fn parameters(&self) -> Result<Vec<ParamSpec>> {
        let shapes = self.infer_shapes()?;
        let inputs = self.resolve_inputs()?;
        let input_channels = self.input_channels;
        let mut params = Vec::new();
        for ((layer, ins), _) in self.layers.iter().zip(&inputs).zip(&shapes) {
            let in_c = ins[0].map_or(input_channels, |j| shapes[j].0);
            let mut push = |suffix: &str, shape: Vec<usize>| {
                params.push(ParamSpec {
                    layer: layer.name.clone(),
                    name: format!("{}.{suffix}", layer.name),
                    shape,
                })
            };
            match layer.kind {
                LayerKind::Conv { filters, kernel } => {
                    push("weight", vec![filters, in_c, kernel, kernel]);
                    push("bias", vec![filters]);
                }
                LayerKind::BatchNorm => {
                    for p in &BN_PARAMS[..4] {
                        push(p, vec![in_c]);
                    }
                    push(BN_PARAMS[4], vec![1]);
                }
                _ => {}
            }
        }
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format("network spec", e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_slice(&bytes)
            .map_err(|e| Error::format("network spec", e.to_string()).at_path(path))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
