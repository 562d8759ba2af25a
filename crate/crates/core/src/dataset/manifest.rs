//! Line-delimited JSON manifest.
//!
//! The first line is a `header` record; it is followed by one `sample` record
//! per generated sample (in sample order) and then one `block` record per
//! block pair (sample order, then row-major block order). Paths are relative
//! to the directory containing the manifest and always use `/`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::canvas::EmbeddedCanvasSpec;
use crate::embedding::EmbeddingConfig;
use crate::error::{Error, Result};
use crate::seed::{self, Stream};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub version: u32,
    pub rng: String,
    pub master_seed: u64,
    pub split_seed: u64,
    pub val_fraction: f64,
    pub block_size: usize,
    pub canvas: EmbeddedCanvasSpec,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub sample_id: String,
    pub split: Split,
    pub host_source: String,
    pub host_path: String,
    pub embedded_canvas_path: String,
    pub hologram_path: Option<String>,
    pub reconstruction_path: String,
    pub glyph_indices: Vec<usize>,
    pub phase_seed: u64,
    pub config: EmbeddingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub sample_id: String,
    pub block_index: usize,
    pub split: Split,
    pub input_block_path: String,
    pub target_block_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Record {
    Header(ManifestHeader),
    Sample(SampleEntry),
    Block(BlockRecord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub header: ManifestHeader,
    pub entries: Vec<SampleEntry>,
    pub block_records: Vec<BlockRecord>,
}

impl DatasetManifest {
    pub fn sample_count(&self, split: Split) -> usize {
        self.entries.iter().filter(|e| e.split == split).count()
    }

    pub fn block_count(&self, split: Split) -> usize {
        self.block_records
            .iter()
            .filter(|b| b.split == split)
            .count()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |r: Record| {
            out.push_str(&serde_json::to_string(&r).expect("manifest records serialize"));
            out.push('\n');
        };
        push(Record::Header(self.header.clone()));
        self.entries
            .iter()
            .cloned()
            .for_each(|e| push(Record::Sample(e)));
        self.block_records
            .iter()
            .cloned()
            .for_each(|b| push(Record::Block(b)));
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_jsonl().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let origin = path.display().to_string();
        let mut header = None;
        let mut entries = Vec::new();
        let mut block_records = Vec::new();
        for (n, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Record = serde_json::from_str(&line)
                .map_err(|e| Error::format(&origin, format!("line {}: {e}", n + 1)))?;
            match rec {
                Record::Header(h) if header.is_none() && n == 0 => header = Some(h),
                Record::Header(_) => {
                    return Err(Error::format(
                        &origin,
                        format!("line {}: unexpected header", n + 1),
                    ))
                }
                Record::Sample(s) => entries.push(s),
                Record::Block(b) => block_records.push(b),
            }
        }
        let header = header.ok_or_else(|| Error::format(&origin, "missing header record"))?;
        Ok(DatasetManifest {
            header,
            entries,
            block_records,
        })
    }
}

/// Number of validation samples: `round(n * val_fraction)`, but at least one
/// when `n >= 2` and the fraction is positive, and never all of them.
pub fn val_sample_count(n: usize, val_fraction: f64) -> usize {
    if n < 2 || val_fraction <= 0.0 {
        return 0;
    }
    ((n as f64 * val_fraction).round() as usize).clamp(1, n - 1)
}

/// Whole-sample split: a Fisher–Yates permutation of `0..n` drawn from the
/// split stream; the first `val_sample_count` indices become validation.
pub fn assign_splits(n: usize, val_fraction: f64, split_seed: u64) -> Vec<Split> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seed::rng(seed::derive_seed(split_seed, Stream::Split, 0));
    for i in (1..n).rev() {
        let j = seed::below(&mut rng, i as u64 + 1) as usize;
        order.swap(i, j);
    }
    let mut splits = vec![Split::Train; n];
    for &i in &order[..val_sample_count(n, val_fraction)] {
        splits[i] = Split::Val;
    }
    splits
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_split_counts() {
        // 300 samples x 256 blocks -> 75,520 train / 1,280 val blocks
        let frac = 5.0 / 300.0;
        assert_eq!(val_sample_count(300, frac), 5);
        let s = assign_splits(300, frac, 1);
        let val = s.iter().filter(|&&x| x == Split::Val).count();
        assert_eq!(val * 256, 1280);
        assert_eq!((300 - val) * 256, 75_520);
    }

    #[test]
    fn split_is_deterministic_and_seeded() {
        let a = assign_splits(50, 0.2, 7);
        assert_eq!(a, assign_splits(50, 0.2, 7));
        assert_ne!(a, assign_splits(50, 0.2, 8));
        assert_eq!(a.iter().filter(|&&x| x == Split::Val).count(), 10);
    }

    #[test]
    fn small_counts() {
        assert_eq!(val_sample_count(1, 0.5), 0);
        assert_eq!(val_sample_count(20, 5.0 / 300.0), 1);
        assert_eq!(val_sample_count(2, 0.99), 1);
        assert_eq!(val_sample_count(10, 0.0), 0);
    }

    #[test]
    fn jsonl_round_trip() {
        let m = DatasetManifest {
            header: ManifestHeader {
                version: MANIFEST_VERSION,
                rng: seed::PHASE_RNG_ID.into(),
                master_seed: 1,
                split_seed: 2,
                val_fraction: 0.5,
                block_size: 128,
                canvas: EmbeddedCanvasSpec::default(),
                samples: 1,
            },
            entries: vec![SampleEntry {
                sample_id: "s00000".into(),
                split: Split::Train,
                host_source: "/data/a.jpg".into(),
                host_path: "hosts/s00000.pgm".into(),
                embedded_canvas_path: "canvases/s00000.pgm".into(),
                hologram_path: None,
                reconstruction_path: "reconstructions/s00000.pgm".into(),
                glyph_indices: vec![3, 1],
                phase_seed: 77,
                config: EmbeddingConfig::default(),
            }],
            block_records: vec![BlockRecord {
                sample_id: "s00000".into(),
                block_index: 0,
                split: Split::Train,
                input_block_path: "blocks/input/s00000_b0000.pgm".into(),
                target_block_path: "blocks/target/s00000_b0000.pgm".into(),
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("manifest.jsonl");
        m.write(&p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("{\"record\":\"header\""));
        assert_eq!(text.lines().count(), 3);
        assert_eq!(DatasetManifest::read(&p).unwrap(), m);
    }

    #[test]
    fn read_reports_bad_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        fs::write(&p, "{\"record\":\"nope\"}\n").unwrap();
        let err = DatasetManifest::read(&p).unwrap_err().to_string();
        assert!(err.contains("m.jsonl") && err.contains("line 1"), "{err}");
    }
}
