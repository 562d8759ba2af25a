//! Run configuration: a TOML file overlaid by command-line flags.
//!
//! Every key is optional in the file; missing keys take the defaults below.
//! The fully resolved configuration is echoed (as TOML) before any command
//! does work, and that echo parses back to the same [`RunConfig`].

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{EmbeddedCanvasSpec, DEFAULT_VAL_FRACTION};
use crate::embedding::EmbeddingConfig;
use crate::error::{Error, Result};

pub const SEED_ENV: &str = "HOLOGLYPH_SEED";

/// `ROWSxCOLS`, e.g. `8x8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
}

impl FromStr for GridShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("grid `{s}` is not of the form ROWSxCOLS"));
        let (r, c) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let rows = r.trim().parse().map_err(|_| bad())?;
        let cols = c.trim().parse().map_err(|_| bad())?;
        if rows == 0 || cols == 0 {
            return Err(bad());
        }
        Ok(GridShape { rows, cols })
    }
}

impl std::fmt::Display for GridShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

impl Serialize for GridShape {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GridShape {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub host: Option<PathBuf>,
    pub payload: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub spec: Option<PathBuf>,
    pub glyphs: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed. Unset in a file means "use `HOLOGLYPH_SEED`, else 0".
    pub seed: Option<u64>,
    pub split_seed: u64,
    /// Square frame / canvas side, pixels.
    pub size: usize,
    pub block_size: usize,
    pub glyph_size: usize,
    pub grid: GridShape,
    /// Glyph grid top-left corner `[x, y]`, pixels.
    pub offset: [usize; 2],
    pub val_fraction: f64,
    /// Worker threads; 0 means one per logical CPU.
    pub jobs: usize,
    pub embedding: EmbeddingConfig,
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            split_seed: 0,
            size: 2048,
            block_size: 128,
            glyph_size: 128,
            grid: GridShape { rows: 8, cols: 8 },
            offset: [0, 0],
            val_fraction: DEFAULT_VAL_FRACTION,
            jobs: 0,
            embedding: EmbeddingConfig::default(),
            paths: Paths::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::format("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| Error::format("config", e.to_string()).at_path(path))?;
        Self::from_toml(text).map_err(|e| e.at_path(path))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    /// Fills the seed from the environment fallback, syncs the phase seed
    /// and resolves `jobs = 0`.
    pub fn resolve(mut self, env_seed: Option<&str>) -> Result<Self> {
        if self.seed.is_none() {
            self.seed = Some(match env_seed {
                Some(s) => s.trim().parse().map_err(|_| {
                    Error::InvalidConfig(format!("{SEED_ENV}=`{s}` is not an unsigned integer"))
                })?,
                None => 0,
            });
        }
        self.embedding.phase_seed = self.seed.unwrap_or_default();
        if self.jobs == 0 {
            self.jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
        }
        self.embedding.validate()?;
        Ok(self)
    }

    pub fn master_seed(&self) -> u64 {
        self.seed.unwrap_or_default()
    }

    pub fn canvas_spec(&self) -> EmbeddedCanvasSpec {
        EmbeddedCanvasSpec {
            canvas_size: self.size,
            glyph_size: self.glyph_size,
            rows: self.grid.rows,
            cols: self.grid.cols,
            offset: (self.offset[0], self.offset[1]),
            glyph_source: self.paths.glyphs.clone().unwrap_or_default(),
        }
    }
}
