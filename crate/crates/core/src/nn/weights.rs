//! HWF1 weight container.
//!
//! ```text
//! "HWF1"
//! u32 tensor_count
//! repeat tensor_count:
//!     u32 name_len, name (UTF-8)
//!     u32 rank, u32 dims[rank]
//!     f32 values[prod(dims)]        row-major
//! ```
//!
//! Integers and floats are little-endian. Tensors keep their file order, so
//! reading and re-writing a file reproduces it byte for byte.

use std::fs;
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::nn::spec::NetworkSpec;
use crate::nn::tensor::Tensor;
use crate::seed::{self, Stream};

pub const HWF_MAGIC: &[u8; 4] = b"HWF1";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightStore {
    tensors: IndexMap<String, Tensor>,
}

impl WeightStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces; replacing keeps the original position.
    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) {
        self.tensors.insert(name.into(), tensor);
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.tensors.get_mut(name)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(String::as_str)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(HWF_MAGIC);
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for (name, t) in &self.tensors {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(t.rank() as u32).to_le_bytes());
            for &d in t.shape() {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Cursor { buf: bytes, pos: 0 };
        if r.bytes(4)? != HWF_MAGIC {
            return Err(Error::format("hwf", "missing HWF1 magic"));
        }
        let count = r.u32()?;
        let mut store = WeightStore::new();
        for _ in 0..count {
            let name_len = r.u32()? as usize;
            let name = std::str::from_utf8(r.bytes(name_len)?)
                .map_err(|_| r.err("tensor name is not UTF-8"))?
                .to_owned();
            let rank = r.u32()? as usize;
            let shape = (0..rank)
                .map(|_| r.u32().map(|d| d as usize))
                .collect::<Result<Vec<_>>>()?;
            let n = shape
                .iter()
                .try_fold(1usize, |a, &d| a.checked_mul(d))
                .and_then(|n| n.checked_mul(4))
                .ok_or_else(|| r.err("tensor size overflows"))?;
            let data = r
                .bytes(n)?
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if store.tensors.contains_key(&name) {
                return Err(r.err(&format!("duplicate tensor `{name}`")));
            }
            store.tensors.insert(name, Tensor::new(shape, data)?);
        }
        if r.pos != bytes.len() {
            return Err(r.err(&format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(store)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes).map_err(|e| e.at_path(path))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    /// Checks that the store holds exactly the spec's parameters with the
    /// expected shapes. Errors name the first offending layer in spec order.
    pub fn validate_against(&self, spec: &NetworkSpec) -> Result<()> {
        let params = spec.parameters()?;
        for p in &params {
            let t = self.get(&p.name).ok_or_else(|| Error::Weights {
                layer: p.layer.clone(),
                msg: format!("missing tensor `{}`", p.name),
            })?;
            if t.shape() != p.shape.as_slice() {
                return Err(Error::Weights {
                    layer: p.layer.clone(),
                    msg: format!(
                        "tensor `{}` has shape {:?}, expected {:?}",
                        p.name,
                        t.shape(),
                        p.shape
                    ),
                });
            }
            if p.name.ends_with(".running_var") && t.data().iter().any(|&v| v.is_nan() || v < 0.0) {
                return Err(Error::Weights {
                    layer: p.layer.clone(),
                    msg: "running variance must be non-negative".into(),
                });
            }
        }
        if self.len() != params.len() {
            let extra = self
                .names()
                .find(|n| !params.iter().any(|p| p.name == *n))
                .unwrap_or_default();
            return Err(Error::Weights {
                layer: extra.split('.').next().unwrap_or_default().to_owned(),
                msg: format!("unexpected tensor `{extra}`"),
            });
        }
        Ok(())
    }

    /// Random parameters for `spec`, in spec order: conv weights uniform in
    /// `±sqrt(3 / fan_in)`, small biases, batch-norm statistics near identity.
    pub fn random(spec: &NetworkSpec, seed: u64) -> Result<Self> {
        let mut rng = seed::rng(seed::derive_seed(seed, Stream::Weights, 0));
        let mut u = move |lo: f32, hi: f32| lo + (hi - lo) * seed::unit_f64(&mut rng) as f32;
        let mut store = WeightStore::new();
        for p in spec.parameters()? {
            let n: usize = p.shape.iter().product();
            let suffix = p.name.rsplit('.').next().unwrap_or_default();
            let data: Vec<f32> = match suffix {
                "weight" => {
                    let fan_in: usize = p.shape[1..].iter().product();
                    let a = (3.0 / fan_in as f32).sqrt();
                    (0..n).map(|_| u(-a, a)).collect()
                }
                "bias" | "beta" | "running_mean" => (0..n).map(|_| u(-0.1, 0.1)).collect(),
                "gamma" => (0..n).map(|_| u(0.8, 1.2)).collect(),
                "running_var" => (0..n).map(|_| u(0.5, 1.5)).collect(),
                "epsilon" => vec![1e-3; n],
                other => unreachable!("unknown parameter kind `{other}`"),
            };
            store.insert(p.name, Tensor::new(p.shape, data)?);
        }
        Ok(store)
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::format("hwf", format!("{msg} (at byte {})", self.pos))
    }

    fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| self.err("unexpected end of file"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }
}
