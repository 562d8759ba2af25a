//! Forward kernels. All spatial operations use stride 1 unless named
//! otherwise; convolutions zero-pad so the output keeps the input size.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

pub fn conv2d(input: &Tensor, kernel: &Tensor, bias: &[f32]) -> Result<Tensor> {
    let (cin, h, w) = input.chw()?;
    let (cout, kin, kh, kw) = match kernel.shape()[..] {
        [o, i, kh, kw] => (o, i, kh, kw),
        _ => {
            return Err(Error::Shape(format!(
                "kernel must be (out, in, kh, kw), got {:?}",
                kernel.shape()
            )))
        }
    };
    if kin != cin {
        return Err(Error::Shape(format!(
            "kernel expects {kin} input channels, activation has {cin}"
        )));
    }
    if kh % 2 == 0 || kw % 2 == 0 {
        return Err(Error::Shape(format!("kernel size {kh}x{kw} must be odd")));
    }
    if bias.len() != cout {
        return Err(Error::Shape(format!(
            "bias has {} entries for {cout} filters",
            bias.len()
        )));
    }
    let (ph, pw) = (kh / 2, kw / 2);
    let plane = h * w;
    let src = input.data();
    let k = kernel.data();
    let mut out = vec![0.0f32; cout * plane];

    out.par_chunks_mut(plane).enumerate().for_each(|(o, dst)| {
        dst.fill(bias[o]);
        for i in 0..cin {
            let chan = &src[i * plane..(i + 1) * plane];
            for ky in 0..kh {
                // output rows whose tap ky lands inside the input
                let y0 = ph.saturating_sub(ky);
                let y1 = (h + ph).saturating_sub(ky).min(h);
                for kx in 0..kw {
                    let wv = k[((o * cin + i) * kh + ky) * kw + kx];
                    if wv == 0.0 {
                        continue;
                    }
                    let x0 = pw.saturating_sub(kx);
                    let x1 = (w + pw).saturating_sub(kx).min(w);
                    if x0 >= x1 {
                        continue;
                    }
                    for y in y0..y1 {
                        let sy = y + ky - ph;
                        let s = &chan[sy * w + x0 + kx - pw..sy * w + x1 + kx - pw];
                        let d = &mut dst[y * w + x0..y * w + x1];
                        for (dv, sv) in d.iter_mut().zip(s) {
                            *dv += wv * sv;
                        }
                    }
                }
            }
        }
    });
    Tensor::new(vec![cout, h, w], out)
}

/// `gamma (x - mean) / sqrt(var + epsilon) + beta`, per channel.
pub fn batch_norm(
    input: &Tensor,
    gamma: &[f32],
    beta: &[f32],
    mean: &[f32],
    var: &[f32],
    epsilon: f32,
) -> Result<Tensor> {
    let (c, h, w) = input.chw()?;
    for (name, v) in [
        ("gamma", gamma),
        ("beta", beta),
        ("mean", mean),
        ("var", var),
    ] {
        if v.len() != c {
            return Err(Error::Shape(format!(
                "batch-norm {name} has {} entries for {c} channels",
                v.len()
            )));
        }
    }
    let plane = h * w;
    let mut out = input.data().to_vec();
    for (ch, chunk) in out.chunks_mut(plane).enumerate() {
        let inv_std = 1.0 / (var[ch] + epsilon).sqrt();
        let (g, b, m) = (gamma[ch], beta[ch], mean[ch]);
        for v in chunk {
            *v = g * ((*v - m) * inv_std) + b;
        }
    }
    Tensor::new(vec![c, h, w], out)
}

pub fn relu(input: &Tensor) -> Tensor {
    let mut out = input.clone();
    out.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    out
}

pub fn max_pool_2x2(input: &Tensor) -> Result<Tensor> {
    let (c, h, w) = input.chw()?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::Shape(format!(
            "2x2 max pooling needs even spatial dims, got {h}x{w}"
        )));
    }
    let (oh, ow) = (h / 2, w / 2);
    let src = input.data();
    let mut out = Vec::with_capacity(c * oh * ow);
    for ch in 0..c {
        let base = ch * h * w;
        for y in 0..oh {
            let r0 = base + 2 * y * w;
            let r1 = r0 + w;
            for x in 0..ow {
                let m = src[r0 + 2 * x]
                    .max(src[r0 + 2 * x + 1])
                    .max(src[r1 + 2 * x])
                    .max(src[r1 + 2 * x + 1]);
                out.push(m);
            }
        }
    }
    Tensor::new(vec![c, oh, ow], out)
}

/// Nearest-neighbor 2x upsampling: each pixel becomes a 2x2 block.
pub fn upsample_2x_nearest(input: &Tensor) -> Result<Tensor> {
    let (c, h, w) = input.chw()?;
    let src = input.data();
    let ow = 2 * w;
    let mut out = vec![0.0f32; c * 4 * h * w];
    for ch in 0..c {
        for y in 0..h {
            let row = &src[(ch * h + y) * w..(ch * h + y + 1) * w];
            let dst0 = (ch * 2 * h + 2 * y) * ow;
            for (x, &v) in row.iter().enumerate() {
                out[dst0 + 2 * x] = v;
                out[dst0 + 2 * x + 1] = v;
            }
            out.copy_within(dst0..dst0 + ow, dst0 + ow);
        }
    }
    Tensor::new(vec![c, 2 * h, 2 * w], out)
}

/// Stacks activations along the channel axis, in argument order.
pub fn concat_channels(inputs: &[&Tensor]) -> Result<Tensor> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::Shape("concat needs at least one input".into()))?;
    let (_, h, w) = first.chw()?;
    let mut channels = 0;
    let mut data = Vec::new();
    for t in inputs {
        let (c, th, tw) = t.chw()?;
        if (th, tw) != (h, w) {
            return Err(Error::Shape(format!(
                "concat spatial mismatch: {h}x{w} vs {th}x{tw}"
            )));
        }
        channels += c;
        data.extend_from_slice(t.data());
    }
    Tensor::new(vec![channels, h, w], data)
}

pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "residual add shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let data = a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect();
    Tensor::new(a.shape().to_vec(), data)
}
