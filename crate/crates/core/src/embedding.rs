//! Hologram composition and reconstruction.
//!
//! A host image `h` and an embedded image `e` are recorded at opposite signed
//! depths and superimposed:
//!
//! ```text
//! u = N(P_{z_host}(h)) + alpha * N(P_{z_embed}(e · exp(iθ)))
//! ```
//!
//! where `P_z` is angular-spectrum propagation, `N` divides by the peak
//! amplitude and `θ` is a seeded random phase that spreads the embedded
//! image over the whole aperture. Back-propagating `u` by `-z_host` (or
//! `-z_embed`) brings the corresponding image into focus while the other one
//! stays defocused.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{self, ComplexField, PropagationParams};
use crate::raster::Image;
use crate::seed::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    /// Recording distance of the host image, meters.
    pub z_host: f64,
    /// Recording distance of the embedded image, meters.
    pub z_embed: f64,
    /// Embedding strength in `(0, 1]`.
    pub alpha: f64,
    /// Meters.
    pub wavelength: f64,
    /// Sampling interval, meters.
    pub pitch: f64,
    pub phase_seed: u64,
    /// Apply the per-axis aliasing bound during recording and reconstruction.
    pub band_limit: bool,
    /// Also give the host image a random phase (drawn from a stream derived
    /// from `phase_seed`).
    pub host_random_phase: bool,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            z_host: -0.4,
            z_embed: 0.4,
            alpha: 0.04,
            wavelength: 633e-9,
            pitch: 10e-6,
            phase_seed: 0,
            band_limit: false,
            host_random_phase: false,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.z_host.is_finite() && self.z_embed.is_finite()) {
            return bad("recording distances must be finite".into());
        }
        if self.z_host == self.z_embed {
            return bad(format!(
                "z_host and z_embed must differ (both {})",
                self.z_host
            ));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return bad(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            ));
        }
        if !(self.pitch.is_finite() && self.pitch > 0.0) {
            return bad(format!("pitch must be positive, got {}", self.pitch));
        }
        Ok(())
    }

    pub fn distance(&self, plane: Plane) -> f64 {
        match plane {
            Plane::Host => self.z_host,
            Plane::Embed => self.z_embed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Host,
    Embed,
}

impl std::str::FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "host" => Ok(Plane::Host),
            "embed" | "embedded" => Ok(Plane::Embed),
            other => Err(Error::InvalidConfig(format!(
                "unknown plane `{other}` (expected host or embed)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HologramPackage {
    field: ComplexField,
    config: EmbeddingConfig,
}

impl HologramPackage {
    pub fn new(field: ComplexField, config: EmbeddingConfig) -> Result<Self> {
        config.validate()?;
        field.validate()?;
        if field.wavelength() != config.wavelength || field.pitch() != config.pitch {
            return Err(Error::InvalidConfig(format!(
                "field metadata (pitch {}, wavelength {}) disagrees with config (pitch {}, wavelength {})",
                field.pitch(),
                field.wavelength(),
                config.pitch,
                config.wavelength
            )));
        }
        Ok(HologramPackage { field, config })
    }

    pub fn field(&self) -> &ComplexField {
        &self.field
    }

    pub fn config(&self) -> &EmbeddingConfig {
        &self.config
    }

    pub fn into_parts(self) -> (ComplexField, EmbeddingConfig) {
        (self.field, self.config)
    }
}

/// The two max-normalized propagated holograms before weighting.
#[derive(Debug, Clone)]
pub struct Components {
    pub host: ComplexField,
    pub embedded: ComplexField,
}

impl Components {
    pub fn compose(&self, alpha: f64) -> Result<ComplexField> {
        self.host.add(&self.embedded.scaled(alpha.into()))
    }
}

fn check_image(name: &str, img: &Image) -> Result<()> {
    if img.data().iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidConfig(format!(
            "{name} image values must lie in [0, 1]"
        )));
    }
    Ok(())
}

/// Propagates and normalizes host and embedded images separately.
pub fn components(host: &Image, embedded: &Image, config: &EmbeddingConfig) -> Result<Components> {
    config.validate()?;
    if host.dims() != embedded.dims() {
        return Err(Error::DimensionMismatch(format!(
            "host is {}x{} but embedded image is {}x{}",
            host.width(),
            host.height(),
            embedded.width(),
            embedded.height()
        )));
    }
    check_image("host", host)?;
    check_image("embedded", embedded)?;

    let lift = |img: &Image| ComplexField::from_amplitude(img, config.pitch, config.wavelength);

    let mut host_field = lift(host)?;
    if config.host_random_phase {
        let s = seed::derive_seed(config.phase_seed, Stream::HostPhase, 0);
        host_field = optics::apply_random_phase(&host_field, s)?;
    }
    let embed_field = optics::apply_random_phase(&lift(embedded)?, config.phase_seed)?;

    let record = |f: &ComplexField, z: f64| {
        optics::propagate(f, PropagationParams::new(z, config.band_limit))
            .and_then(|p| optics::normalize(&p))
    };
    Ok(Components {
        host: record(&host_field, config.z_host)?,
        embedded: record(&embed_field, config.z_embed)?,
    })
}

pub fn embed(host: &Image, embedded: &Image, config: &EmbeddingConfig) -> Result<HologramPackage> {
    let parts = components(host, embedded, config)?;
    HologramPackage::new(parts.compose(config.alpha)?, *config)
}

/// Back-propagates an arbitrary field recorded under `config` to `plane`.
pub fn back_propagate(
    field: &ComplexField,
    config: &EmbeddingConfig,
    plane: Plane,
) -> Result<ComplexField> {
    optics::propagate(
        field,
        PropagationParams::new(-config.distance(plane), config.band_limit),
    )
}

/// Amplitude at `plane`, rescaled so the brightest pixel is 1.
pub fn reconstruct(holo: &HologramPackage, plane: Plane) -> Result<Image> {
    let focused = back_propagate(&holo.field, &holo.config, plane)?;
    Ok(optics::amplitude(&focused).rescaled_to_max())
}
