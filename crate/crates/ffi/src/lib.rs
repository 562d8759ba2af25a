//! C ABI over the hologlyph library.
//!
//! Objects are exposed as opaque handles created by `*_new` / `*_load` /
//! producer functions and released with the matching `*_free`. Every fallible
//! call returns an [`HgStatus`]; on failure, [`hg_last_error_message`] holds a
//! description for the calling thread. Panics never cross the boundary.
//!
//! Handles are not internally synchronized for mutation, but all functions
//! here only read from their input handles, so a handle may be shared across
//! threads as long as nobody frees it concurrently.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use hologlyph::embedding::{self, EmbeddingConfig, HologramPackage, Plane};
use hologlyph::nn::{self, Network, NetworkSpec, WeightStore};
use hologlyph::{dataset, holo, metrics, pgm, Error, Image};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Shape = 3,
    Io = 4,
    Format = 5,
    Weights = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgPlane {
    Host = 0,
    Embed = 1,
}

/// Embedding parameters. Distances, wavelength and pitch are in metres.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HgEmbedConfig {
    pub z_host: f64,
    pub z_embed: f64,
    pub alpha: f64,
    pub wavelength: f64,
    pub pitch: f64,
    pub phase_seed: u64,
    pub band_limit: bool,
    pub host_random_phase: bool,
}

impl From<HgEmbedConfig> for EmbeddingConfig {
    fn from(c: HgEmbedConfig) -> Self {
        EmbeddingConfig {
            z_host: c.z_host,
            z_embed: c.z_embed,
            alpha: c.alpha,
            wavelength: c.wavelength,
            pitch: c.pitch,
            phase_seed: c.phase_seed,
            band_limit: c.band_limit,
            host_random_phase: c.host_random_phase,
        }
    }
}

impl From<EmbeddingConfig> for HgEmbedConfig {
    fn from(c: EmbeddingConfig) -> Self {
        HgEmbedConfig {
            z_host: c.z_host,
            z_embed: c.z_embed,
            alpha: c.alpha,
            wavelength: c.wavelength,
            pitch: c.pitch,
            phase_seed: c.phase_seed,
            band_limit: c.band_limit,
            host_random_phase: c.host_random_phase,
        }
    }
}

/// Grayscale image, row-major `f64` samples.
pub struct HgImage(Image);

/// Complex hologram plus the parameters it was recorded with.
pub struct HgHologram(HologramPackage);

/// Restoration network with validated weights.
pub struct HgNetwork(Network);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Utf8(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn status_of(e: &Error) -> HgStatus {
    match e {
        Error::InvalidField(_) | Error::Degenerate(_) | Error::InvalidConfig(_) => {
            HgStatus::InvalidArgument
        }
        Error::DimensionMismatch(_) | Error::Shape(_) => HgStatus::Shape,
        Error::Io { .. } => HgStatus::Io,
        Error::Format { .. } => HgStatus::Format,
        Error::Weights { .. } => HgStatus::Weights,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HgStatus {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HgStatus::Ok
        }
        Ok(Err(Failure::Null(arg))) => {
            set_last_error(format!("`{arg}` is NULL"));
            HgStatus::NullPointer
        }
        Ok(Err(Failure::Utf8(arg))) => {
            set_last_error(format!("`{arg}` is not valid UTF-8"));
            HgStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            HgStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn path_arg(p: *const c_char, name: &'static str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Utf8(name))?;
    Ok(PathBuf::from(s))
}

unsafe fn emit<T>(out: *mut *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn check_out<T>(out: *mut *mut T, name: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure::Null(name))
    } else {
        *out = ptr::null_mut();
        Ok(())
    }
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failed call on this thread, or NULL after a
/// successful call. Valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn hg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn hg_embed_config_default() -> HgEmbedConfig {
    EmbeddingConfig::default().into()
}

/// Copies `width * height` samples from `data` into a new image.
///
/// # Safety
/// `data` must point to `width * height` readable `f64`s; `out` must be a
/// valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn hg_image_new(
    width: usize,
    height: usize,
    data: *const f64,
    out: *mut *mut HgImage,
) -> HgStatus {
    guard(|| {
        check_out(out, "out")?;
        if data.is_null() {
            return Err(Failure::Null("data"));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| Error::InvalidConfig("image size overflows".into()))?;
        let samples = std::slice::from_raw_parts(data, n).to_vec();
        emit(out, HgImage(Image::new(width, height, samples)?), "out")
    })
}

/// Loads any supported raster as grayscale in `[0, 1]`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn hg_image_load(path: *const c_char, out: *mut *mut HgImage) -> HgStatus {
    guard(|| {
        check_out(out, "out")?;
        let path = path_arg(path, "path")?;
        emit(out, HgImage(pgm::load_grayscale(&path)?), "out")
    })
}

/// Saves as 8-bit grayscale; the format follows the extension (P5 for
/// `.pgm` or none).
///
/// # Safety
/// `image` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hg_image_save(image: *const HgImage, path: *const c_char) -> HgStatus {
    guard(|| {
        let img = deref(image, "image")?;
        let path = path_arg(path, "path")?;
        Ok(pgm::save_image(&path, &img.0)?)
    })
}

/// # Safety
/// `image` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn hg_image_width(image: *const HgImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.width())
}

/// # Safety
/// `image` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn hg_image_height(image: *const HgImage) -> usize {
    image.as_ref().map_or(0, |i| i.0.height())
}

/// Borrowed pointer to the row-major samples; valid until the image is freed.
///
/// # Safety
/// `image` must be a live handle or NULL (returns NULL).
#[no_mangle]
pub unsafe extern "C" fn hg_image_data(image: *const HgImage) -> *const f64 {
    image.as_ref().map_or(ptr::null(), |i| i.0.data().as_ptr())
}

/// # Safety
/// `image` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hg_image_free(image: *mut HgImage) {
    release(image)
}

/// Embeds `payload` into `host` (same size, power-of-two square, values in
/// `[0, 1]`). A NULL `config` uses the defaults.
///
/// # Safety
/// `host` and `payload` must be live handles; `config` NULL or valid; `out`
/// a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn hg_embed(
    host: *const HgImage,
    payload: *const HgImage,
    config: *const HgEmbedConfig,
    out: *mut *mut HgHologram,
) -> HgStatus {
    guard(|| {
        check_out(out, "out")?;
        let host = deref(host, "host")?;
        let payload = deref(payload, "payload")?;
        let cfg = config
            .as_ref()
            .map_or_else(EmbeddingConfig::default, |c| (*c).into());
        emit(
            out,
            HgHologram(embedding::embed(&host.0, &payload.0, &cfg)?),
            "out",
        )
    })
}

/// # Safety
/// `hologram` must be a live handle; `out` a valid config slot.
#[no_mangle]
pub unsafe extern "C" fn hg_hologram_config(
    hologram: *const HgHologram,
    out: *mut HgEmbedConfig,
) -> HgStatus {
    guard(|| {
        let h = deref(hologram, "hologram")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        *out = (*h.0.config()).into();
        Ok(())
    })
}

/// Amplitude at `plane`, rescaled so the brightest pixel is 1.
///
/// # Safety
/// `hologram` must be a live handle; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn hg_reconstruct(
    hologram: *const HgHologram,
    plane: HgPlane,
    out: *mut *mut HgImage,
) -> HgStatus {
    guard(|| {
        check_out(out, "out")?;
        let h = deref(hologram, "hologram")?;
        let plane = match plane {
            HgPlane::Host => Plane::Host,
            HgPlane::Embed => Plane::Embed,
        };
        emit(out, HgImage(embedding::reconstruct(&h.0, plane)?), "out")
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn hg_hologram_load(
    path: *const c_char,
    out: *mut *mut HgHologram,
) -> HgStatus {
    guard(|| {
        check_out(out, "out")?;
        let path = path_arg(path, "path")?;
        emit(out, HgHologram(holo::read(&path)?), "out")
    })
}

/// # Safety
/// `hologram` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hg_hologram_save(
    hologram: *const HgHologram,
    path: *const c_char,
) -> HgStatus {
    guard(|| {
        let h = deref(hologram, "hologram")?;
        let path = path_arg(path, "path")?;
        Ok(holo::write(&path, &h.0)?)
    })
}

/// # Safety
/// `hologram` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hg_hologram_free(hologram: *mut HgHologram) {
    release(hologram)
}

/// Loads a JSON network description and HWF1 weights, validating one
/// against the other.
///
/// # Safety
/// Both paths must be NUL-terminated strings; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn hg_network_load(
    spec_path: *const c_char,
    weights_path: *const c_char,
    out: *mut *mut HgNetwork,
) -> HgStatus {
    guard(|| {
        check_out(out, "out")?;
        let spec = NetworkSpec::read(path_arg(spec_path, "spec_path")?)?;
        let weights = WeightStore::read(path_arg(weights_path, "weights_path")?)?;
        emit(out, HgNetwork(Network::new(spec, &weights)?), "out")
    })
}

/// # Safety
/// `network` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn hg_network_block_size(network: *const HgNetwork) -> usize {
    network.as_ref().map_or(0, |n| n.0.block_size())
}

/// # Safety
/// `network` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hg_network_free(network: *mut HgNetwork) {
    release(network)
}

/// Restores a square frame block by block; the side must be a multiple of
/// the network's block size.
///
/// # Safety
/// `network` and `frame` must be live handles; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn hg_restore_frame(
    network: *const HgNetwork,
    frame: *const HgImage,
    out: *mut *mut HgImage,
) -> HgStatus {
    guard(|| {
        check_out(out, "out")?;
        let net = deref(network, "network")?;
        let frame = deref(frame, "frame")?;
        let (w, h) = frame.0.dims();
        if w != h {
            return Err(
                Error::DimensionMismatch(format!("frame must be square, got {w}x{h}")).into(),
            );
        }
        let grid = dataset::BlockGrid::new(w, net.0.block_size())?;
        emit(
            out,
            HgImage(nn::restore_frame(&net.0, &frame.0, &grid)?),
            "out",
        )
    })
}

/// PSNR in dB with peak 1, capped at 99 dB for identical images.
///
/// # Safety
/// `a` and `b` must be live handles; `out` a valid `double` slot.
#[no_mangle]
pub unsafe extern "C" fn hg_psnr(a: *const HgImage, b: *const HgImage, out: *mut f64) -> HgStatus {
    guard(|| {
        let v = metrics::psnr(&deref(a, "a")?.0, &deref(b, "b")?.0)?;
        *out.as_mut().ok_or(Failure::Null("out"))? = v;
        Ok(())
    })
}

/// Mean SSIM (11x11 Gaussian window, sigma 1.5); images must be at least
/// 11x11.
///
/// # Safety
/// `a` and `b` must be live handles; `out` a valid `double` slot.
#[no_mangle]
pub unsafe extern "C" fn hg_ssim(a: *const HgImage, b: *const HgImage, out: *mut f64) -> HgStatus {
    guard(|| {
        let v = metrics::ssim(&deref(a, "a")?.0, &deref(b, "b")?.0)?;
        *out.as_mut().ok_or(Failure::Null("out"))? = v;
        Ok(())
    })
}
