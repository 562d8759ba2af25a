use rayon::prelude::*;

use crate::dataset::{tile, untile, BlockGrid};
use crate::error::{Error, Result};
use crate::nn::ops;
use crate::nn::spec::{LayerKind, NetworkSpec};
use crate::nn::tensor::Tensor;
use crate::nn::weights::WeightStore;
use crate::raster::Image;

enum Params {
    None,
    Conv {
        weight: Tensor,
        bias: Vec<f32>,
    },
    BatchNorm {
        gamma: Vec<f32>,
        beta: Vec<f32>,
        mean: Vec<f32>,
        var: Vec<f32>,
        epsilon: f32,
    },
}

struct Step {
    kind: LayerKind,
    inputs: Vec<Option<usize>>,
    params: Params,
    /// Index of the last step reading this step's output.
    last_use: usize,
}

/// A validated network ready for inference. Immutable; share it across
/// threads freely.
pub struct Network {
    spec: NetworkSpec,
    steps: Vec<Step>,
}

impl Network {
    /// Validates `weights` against `spec` before anything else.
    pub fn new(spec: NetworkSpec, weights: &WeightStore) -> Result<Self> {
        weights.validate_against(&spec)?;
        let inputs = spec.resolve_inputs()?;
        let vec_of = |name: String| weights.get(&name).unwrap().data().to_vec();
        let mut steps: Vec<Step> = spec
            .layers
            .iter()
            .zip(inputs)
            .map(|(layer, inputs)| {
                let n = &layer.name;
                let params = match layer.kind {
                    LayerKind::Conv { .. } => Params::Conv {
                        weight: weights.get(&format!("{n}.weight")).unwrap().clone(),
                        bias: vec_of(format!("{n}.bias")),
                    },
                    LayerKind::BatchNorm => Params::BatchNorm {
                        gamma: vec_of(format!("{n}.gamma")),
                        beta: vec_of(format!("{n}.beta")),
                        mean: vec_of(format!("{n}.running_mean")),
                        var: vec_of(format!("{n}.running_var")),
                        epsilon: vec_of(format!("{n}.epsilon"))[0],
                    },
                    _ => Params::None,
                };
                Step {
                    kind: layer.kind.clone(),
                    inputs,
                    params,
                    last_use: 0,
                }
            })
            .collect();
        let last = steps.len() - 1;
        for i in 0..steps.len() {
            for j in steps[i].inputs.clone().into_iter().flatten() {
                steps[j].last_use = steps[j].last_use.max(i);
            }
        }
        steps[last].last_use = usize::MAX;
        Ok(Network { spec, steps })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn block_size(&self) -> usize {
        self.spec.block_size
    }

    /// Raw (unclamped) network output for a `(C, H, W)` input.
    pub fn forward_tensor(&self, input: &Tensor) -> Result<Tensor> {
        let (c, _, _) = input.chw()?;
        if c != self.spec.input_channels {
            return Err(Error::Shape(format!(
                "network takes {} input channel(s), got {c}",
                self.spec.input_channels
            )));
        }
        let mut outputs: Vec<Option<Tensor>> = Vec::with_capacity(self.steps.len());
        for (i, step) in self.steps.iter().enumerate() {
            let args: Vec<&Tensor> = step
                .inputs
                .iter()
                .map(|src| match src {
                    None => input,
                    Some(j) => outputs[*j].as_ref().expect("released before last use"),
                })
                .collect();
            let out = match (&step.kind, &step.params) {
                (LayerKind::Conv { .. }, Params::Conv { weight, bias }) => {
                    ops::conv2d(args[0], weight, bias)?
                }
                (
                    LayerKind::BatchNorm,
                    Params::BatchNorm {
                        gamma,
                        beta,
                        mean,
                        var,
                        epsilon,
                    },
                ) => ops::batch_norm(args[0], gamma, beta, mean, var, *epsilon)?,
                (LayerKind::Relu, _) => ops::relu(args[0]),
                (LayerKind::MaxPool2x2, _) => ops::max_pool_2x2(args[0])?,
                (LayerKind::Upsample2xNearest, _) => ops::upsample_2x_nearest(args[0])?,
                (LayerKind::ConcatSkip, _) => ops::concat_channels(&args)?,
                (LayerKind::ResidualAdd, _) => ops::add(args[0], args[1])?,
                _ => unreachable!("parameters are built from the layer kind"),
            };
            outputs.push(Some(out));
            for j in step.inputs.iter().flatten() {
                if self.steps[*j].last_use == i {
                    outputs[*j] = None;
                }
            }
        }
        Ok(outputs
            .pop()
            .flatten()
            .expect("network has an output layer"))
    }

    /// Restores one block; the output is clamped to `[0, 1]`.
    pub fn forward(&self, block: &Image) -> Result<Image> {
        let out = self.forward_tensor(&Tensor::from_image(block))?;
        Ok(out.to_image()?.clamped())
    }
}

/// Tiles `frame`, restores every block in parallel and reassembles.
pub fn restore_frame(net: &Network, frame: &Image, grid: &BlockGrid) -> Result<Image> {
    let blocks = tile(frame, grid)?;
    let restored = blocks
        .par_iter()
        .map(|b| net.forward(b))
        .collect::<Result<Vec<_>>>()?;
    untile(&restored, grid)
}

/// Sequential restoration visiting blocks in `order` (a permutation of the
/// block indices). Produces the same frame as [`restore_frame`].
pub fn restore_frame_in_order(
    net: &Network,
    frame: &Image,
    grid: &BlockGrid,
    order: &[usize],
) -> Result<Image> {
    let mut seen = vec![false; grid.block_count()];
    if order.len() != seen.len() {
        return Err(Error::DimensionMismatch(format!(
            "order lists {} blocks, grid has {}",
            order.len(),
            seen.len()
        )));
    }
    let blocks = tile(frame, grid)?;
    let mut restored: Vec<Option<Image>> = vec![None; blocks.len()];
    for &i in order {
        if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
            return Err(Error::DimensionMismatch(format!(
                "order is not a permutation (index {i})"
            )));
        }
        restored[i] = Some(net.forward(&blocks[i])?);
    }
    let restored: Vec<Image> = restored.into_iter().map(Option::unwrap).collect();
    untile(&restored, grid)
}
