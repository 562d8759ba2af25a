//! Complex scalar fields and band-limited angular-spectrum propagation.
//!
//! A field is propagated over a signed distance `z` by taking its 2D DFT,
//! multiplying by
//!
//! ```text
//! H(fx, fy) = exp(i 2π z sqrt(1/λ² − fx² − fy²))
//! ```
//!
//! and transforming back. Frequencies use the standard wraparound order
//! (`k < N/2` maps to `k Δf`, otherwise `(k − N) Δf`, with `Δf = 1/(N pitch)`).
//! Evanescent bins (`1/λ² − fx² − fy² < 0`) are set to zero. With band
//! limiting enabled, each axis is additionally clipped at
//!
//! ```text
//! f_limit = 1 / (λ sqrt((2 Δf z)² + 1))
//! ```
//!
//! which keeps the sampled chirp of `H` free of aliasing.

use std::f64::consts::TAU;

pub use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::raster::Image;
use crate::seed;

pub const MIN_FIELD_SIZE: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    width: usize,
    height: usize,
    pitch: f64,
    wavelength: f64,
    data: Vec<Complex64>,
}

fn check_side(name: &str, n: usize) -> Result<()> {
    if n < MIN_FIELD_SIZE || !n.is_power_of_two() {
        return Err(Error::InvalidField(format!(
            "{name} must be a power of two >= {MIN_FIELD_SIZE}, got {n}"
        )));
    }
    Ok(())
}

impl ComplexField {
    pub fn new(
        width: usize,
        height: usize,
        pitch: f64,
        wavelength: f64,
        data: Vec<Complex64>,
    ) -> Result<Self> {
        let field = ComplexField {
            width,
            height,
            pitch,
            wavelength,
            data,
        };
        field.validate()?;
        Ok(field)
    }

    pub fn zeros(width: usize, height: usize, pitch: f64, wavelength: f64) -> Result<Self> {
        Self::new(
            width,
            height,
            pitch,
            wavelength,
            vec![Complex64::new(0.0, 0.0); width * height],
        )
    }

    /// Lifts a real image to a field with zero phase.
    pub fn from_amplitude(image: &Image, pitch: f64, wavelength: f64) -> Result<Self> {
        let data = image
            .data()
            .iter()
            .map(|&a| Complex64::new(a, 0.0))
            .collect();
        Self::new(image.width(), image.height(), pitch, wavelength, data)
    }

    pub fn validate(&self) -> Result<()> {
        check_side("width", self.width)?;
        check_side("height", self.height)?;
        if !(self.pitch.is_finite() && self.pitch > 0.0) {
            return Err(Error::InvalidField(format!(
                "pitch must be positive, got {}",
                self.pitch
            )));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(Error::InvalidField(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        if self.data.len() != self.width * self.height {
            return Err(Error::InvalidField(format!(
                "{}x{} field needs {} samples, got {}",
                self.width,
                self.height,
                self.width * self.height,
                self.data.len()
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Complex64 {
        self.data[y * self.width + x]
    }

    /// Σ|u|².
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_amplitude(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Same geometry, new samples.
    pub fn with_data(&self, data: Vec<Complex64>) -> Result<Self> {
        Self::new(self.width, self.height, self.pitch, self.wavelength, data)
    }

    pub fn scaled(&self, k: Complex64) -> Self {
        ComplexField {
            data: self.data.iter().map(|&c| c * k).collect(),
            ..self.clone()
        }
    }

    /// Elementwise sum; geometry must match exactly.
    pub fn add(&self, other: &ComplexField) -> Result<Self> {
        if (self.width, self.height) != (other.width, other.height)
            || self.pitch != other.pitch
            || self.wavelength != other.wavelength
        {
            return Err(Error::DimensionMismatch(
                "fields differ in size, pitch or wavelength".into(),
            ));
        }
        Ok(ComplexField {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationParams {
    /// Signed propagation distance in meters.
    pub distance: f64,
    pub band_limit: bool,
}

impl PropagationParams {
    pub fn new(distance: f64, band_limit: bool) -> Self {
        PropagationParams {
            distance,
            band_limit,
        }
    }
}

/// Spatial frequency (cycles/m) of DFT bin `k` on an `n`-point axis.
#[inline]
pub fn frequency(k: usize, n: usize, pitch: f64) -> f64 {
    let df = 1.0 / (n as f64 * pitch);
    if k < n / 2 {
        k as f64 * df
    } else {
        (k as f64 - n as f64) * df
    }
}

/// Per-axis aliasing bound for an `n`-point axis.
pub fn band_limit_frequency(n: usize, pitch: f64, wavelength: f64, distance: f64) -> f64 {
    let df = 1.0 / (n as f64 * pitch);
    let t = 2.0 * df * distance;
    1.0 / (wavelength * (t * t + 1.0).sqrt())
}

/// Samples of `H` in DFT order, row-major `height x width`.
pub fn transfer_function(
    width: usize,
    height: usize,
    pitch: f64,
    wavelength: f64,
    params: PropagationParams,
) -> Vec<Complex64> {
    let inv_l2 = 1.0 / (wavelength * wavelength);
    let z = params.distance;
    let (lim_x, lim_y) = if params.band_limit {
        (
            band_limit_frequency(width, pitch, wavelength, z),
            band_limit_frequency(height, pitch, wavelength, z),
        )
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let fxs: Vec<f64> = (0..width).map(|k| frequency(k, width, pitch)).collect();
    let mut h = Vec::with_capacity(width * height);
    for ky in 0..height {
        let fy = frequency(ky, height, pitch);
        for &fx in &fxs {
            let arg = inv_l2 - fx * fx - fy * fy;
            if arg < 0.0 || fx.abs() > lim_x || fy.abs() > lim_y {
                h.push(Complex64::new(0.0, 0.0));
            } else {
                h.push(Complex64::from_polar(1.0, TAU * z * arg.sqrt()));
            }
        }
    }
    h
}

fn transpose(src: &[Complex64], width: usize, height: usize, dst: &mut [Complex64]) {
    for y in 0..height {
        for x in 0..width {
            dst[x * height + y] = src[y * width + x];
        }
    }
}

/// In-place unnormalized 2D DFT of a row-major `height x width` buffer.
fn fft2(data: &mut [Complex64], width: usize, height: usize, direction: FftDirection) {
    let mut planner = FftPlanner::new();
    planner.plan_fft(width, direction).process(data);
    let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
    transpose(data, width, height, &mut t);
    planner.plan_fft(height, direction).process(&mut t);
    transpose(&t, height, width, data);
}

/// Forward 2D DFT of the field samples (DFT order, unnormalized).
pub fn spectrum(field: &ComplexField) -> Vec<Complex64> {
    let mut s = field.data.clone();
    fft2(&mut s, field.width, field.height, FftDirection::Forward);
    s
}

pub fn propagate(field: &ComplexField, params: PropagationParams) -> Result<ComplexField> {
    field.validate()?;
    if !params.distance.is_finite() {
        return Err(Error::InvalidField(format!(
            "propagation distance must be finite, got {}",
            params.distance
        )));
    }
    let (w, h) = (field.width, field.height);
    let mut s = spectrum(field);
    let tf = transfer_function(w, h, field.pitch, field.wavelength, params);
    let norm = 1.0 / (w * h) as f64;
    for (v, t) in s.iter_mut().zip(&tf) {
        *v *= t * norm;
    }
    fft2(&mut s, w, h, FftDirection::Inverse);
    field.with_data(s)
}

/// Multiplies each sample by `exp(iθ)` with θ uniform on `[0, 2π)`, drawn in
/// row-major order from the seeded stream described in [`crate::seed`].
pub fn apply_random_phase(field: &ComplexField, seed: u64) -> Result<ComplexField> {
    field.validate()?;
    let mut rng = seed::rng(seed);
    let data = field
        .data
        .iter()
        .map(|&c| c * Complex64::from_polar(1.0, TAU * seed::unit_f64(&mut rng)))
        .collect();
    field.with_data(data)
}

/// Divides by the largest amplitude so the peak becomes 1.
pub fn normalize(field: &ComplexField) -> Result<ComplexField> {
    field.validate()?;
    let max = field.max_amplitude();
    if max == 0.0 {
        return Err(Error::Degenerate(
            "cannot normalize an all-zero field".into(),
        ));
    }
    if !max.is_finite() {
        return Err(Error::Degenerate(
            "field contains non-finite samples".into(),
        ));
    }
    Ok(ComplexField {
        data: field.data.iter().map(|&c| c / max).collect(),
        ..field.clone()
    })
}

/// Per-sample modulus.
pub fn amplitude(field: &ComplexField) -> Image {
    Image::new(
        field.width,
        field.height,
        field.data.iter().map(|c| c.norm()).collect(),
    )
    .expect("field invariants guarantee a matching image size")
}
