//! `.holo` hologram container.
//!
//! All values little-endian:
//!
//! | offset | type      | field                                   |
//! |--------|-----------|-----------------------------------------|
//! | 0      | `[u8; 4]` | magic `HOLO`                            |
//! | 4      | `u32`     | version (1)                             |
//! | 8      | `u32`     | width                                   |
//! | 12     | `u32`     | height                                  |
//! | 16     | `f64`     | pitch (m)                               |
//! | 24     | `f64`     | wavelength (m)                          |
//! | 32     | `f64`     | z_host (m)                              |
//! | 40     | `f64`     | z_embed (m)                             |
//! | 48     | `f64`     | alpha                                   |
//! | 56     | `u64`     | phase_seed                              |
//! | 64     | `u32`     | flags: bit 0 band_limit, bit 1 host_random_phase |
//! | 68     | `f64` × 2·w·h | samples, row-major, `re, im` interleaved |

use std::fs;
use std::path::Path;

use rustfft::num_complex::Complex64;

use crate::embedding::{EmbeddingConfig, HologramPackage};
use crate::error::{Error, Result};
use crate::optics::ComplexField;

pub const MAGIC: &[u8; 4] = b"HOLO";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 68;

const FLAG_BAND_LIMIT: u32 = 1;
const FLAG_HOST_PHASE: u32 = 1 << 1;

pub fn encode(pkg: &HologramPackage) -> Vec<u8> {
    let f = pkg.field();
    let c = pkg.config();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * f.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(f.width() as u32).to_le_bytes());
    out.extend_from_slice(&(f.height() as u32).to_le_bytes());
    for v in [c.pitch, c.wavelength, c.z_host, c.z_embed, c.alpha] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&c.phase_seed.to_le_bytes());
    let mut flags = 0u32;
    if c.band_limit {
        flags |= FLAG_BAND_LIMIT;
    }
    if c.host_random_phase {
        flags |= FLAG_HOST_PHASE;
    }
    out.extend_from_slice(&flags.to_le_bytes());
    for s in f.data() {
        out.extend_from_slice(&s.re.to_le_bytes());
        out.extend_from_slice(&s.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| Error::format("holo", "truncated header"))?;
        self.pos = end;
        Ok(bytes.try_into().unwrap())
    }

    fn u32(&mut self) -> Result<u32> {
        self.take().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Result<u64> {
        self.take().map(u64::from_le_bytes)
    }

    fn f64(&mut self) -> Result<f64> {
        self.take().map(f64::from_le_bytes)
    }
}

pub fn decode(bytes: &[u8]) -> Result<HologramPackage> {
    let bad = |msg: String| Error::format("holo", msg);
    let mut r = Reader { buf: bytes, pos: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(bad("missing HOLO magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let width = r.u32()? as usize;
    let height = r.u32()? as usize;
    let config = EmbeddingConfig {
        pitch: r.f64()?,
        wavelength: r.f64()?,
        z_host: r.f64()?,
        z_embed: r.f64()?,
        alpha: r.f64()?,
        phase_seed: r.u64()?,
        ..Default::default()
    };
    let flags = r.u32()?;
    if flags & !(FLAG_BAND_LIMIT | FLAG_HOST_PHASE) != 0 {
        return Err(bad(format!("unknown flag bits {flags:#x}")));
    }
    let config = EmbeddingConfig {
        band_limit: flags & FLAG_BAND_LIMIT != 0,
        host_random_phase: flags & FLAG_HOST_PHASE != 0,
        ..config
    };

    let payload = &bytes[HEADER_LEN..];
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(16))
        .ok_or_else(|| bad("dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(bad(format!(
            "{width}x{height} hologram needs {expected} sample bytes, found {}",
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let field = ComplexField::new(width, height, config.pitch, config.wavelength, data)?;
    HologramPackage::new(field, config)
}

pub fn write(path: impl AsRef<Path>, pkg: &HologramPackage) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(pkg)).map_err(|e| Error::io(path, e))
}

pub fn read(path: impl AsRef<Path>) -> Result<HologramPackage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| e.at_path(path))
}

/// True when the file starts with the `.holo` magic.
pub fn sniff(path: impl AsRef<Path>) -> Result<bool> {
    use std::io::Read;
    let path = path.as_ref();
    let mut head = [0u8; 4];
    let mut f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    match f.read_exact(&mut head) {
        Ok(()) => Ok(&head == MAGIC),
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Ok(false),
        Err(e) => Err(Error::io(path, e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn package(seed: u64, w: usize, h: usize, band_limit: bool) -> HologramPackage {
        let mut rng = crate::seed::rng(seed);
        let data = (0..w * h)
            .map(|_| {
                Complex64::new(
                    crate::seed::unit_f64(&mut rng) * 2.0 - 1.0,
                    -crate::seed::unit_f64(&mut rng),
                )
            })
            .collect();
        let config = EmbeddingConfig {
            phase_seed: seed,
            band_limit,
            alpha: 0.25,
            ..Default::default()
        };
        let field = ComplexField::new(w, h, config.pitch, config.wavelength, data).unwrap();
        HologramPackage::new(field, config).unwrap()
    }

    #[test]
    fn header_layout() {
        let pkg = package(3, 16, 32, true);
        let bytes = encode(&pkg);
        assert_eq!(bytes.len(), HEADER_LEN + 16 * 16 * 32);
        assert_eq!(&bytes[..4], b"HOLO");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 16);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 32);
        assert_eq!(f64::from_le_bytes(bytes[48..56].try_into().unwrap()), 0.25);
        assert_eq!(u64::from_le_bytes(bytes[56..64].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[64..68].try_into().unwrap()), 1);
        let first_re = f64::from_le_bytes(bytes[68..76].try_into().unwrap());
        assert_eq!(first_re, pkg.field().data()[0].re);
    }

    #[test]
    fn rejects_corrupt_input() {
        let bytes = encode(&package(1, 16, 16, false));
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode(&bytes[..20]).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(decode(&wrong).is_err());
        let mut version = bytes.clone();
        version[4] = 9;
        assert!(decode(&version).is_err());
        let mut flags = bytes;
        flags[64] = 0x80;
        assert!(decode(&flags).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), wexp in 4u32..7, hexp in 4u32..7, bl in any::<bool>()) {
            let pkg = package(seed, 1 << wexp, 1 << hexp, bl);
            let bytes = encode(&pkg);
            let back = decode(&bytes).unwrap();
            prop_assert_eq!(&back, &pkg);
            prop_assert_eq!(encode(&back), bytes);
        }
    }
}
