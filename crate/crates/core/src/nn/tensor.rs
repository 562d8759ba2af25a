use crate::error::{Error, Result};
use crate::raster::Image;

/// Dense row-major `f32` tensor. Activations are `(channels, height, width)`,
/// convolution kernels `(out, in, kh, kw)`, per-channel parameters rank 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Shape(format!("shape {shape:?} overflows")))?;
        if n != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} holds {n} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn vector(data: Vec<f32>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// `(channels, height, width)` of a rank-3 activation.
    pub fn chw(&self) -> Result<(usize, usize, usize)> {
        match self.shape[..] {
            [c, h, w] => Ok((c, h, w)),
            _ => Err(Error::Shape(format!(
                "expected a (C, H, W) activation, got shape {:?}",
                self.shape
            ))),
        }
    }

    pub fn from_image(img: &Image) -> Self {
        Tensor {
            shape: vec![1, img.height(), img.width()],
            data: img.data().iter().map(|&v| v as f32).collect(),
        }
    }

    /// Channel 0 of a rank-3 activation as an image.
    pub fn to_image(&self) -> Result<Image> {
        let (_, h, w) = self.chw()?;
        Image::new(w, h, self.data[..h * w].iter().map(|&v| v as f64).collect())
    }
}
