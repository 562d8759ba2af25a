use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::dataset::canvas::{build_embedded_canvas, EmbeddedCanvasSpec};
use crate::dataset::grid::{tile, BlockGrid};
use crate::dataset::manifest::{
    assign_splits, BlockRecord, DatasetManifest, ManifestHeader, SampleEntry, Split,
    MANIFEST_VERSION,
};
use crate::embedding::{self, EmbeddingConfig, Plane};
use crate::error::{Error, Result};
use crate::raster::Image;
use crate::seed::{self, Stream};
use crate::{holo, pgm};

/// Train/val ratio that reproduces the 75,520 / 1,280 block split of a
/// 300-sample corpus with whole samples per split.
pub const DEFAULT_VAL_FRACTION: f64 = 5.0 / 300.0;

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub out_dir: PathBuf,
    pub canvas: EmbeddedCanvasSpec,
    /// `phase_seed` is ignored; each sample derives its own from `master_seed`.
    pub embedding: EmbeddingConfig,
    pub block_size: usize,
    pub master_seed: u64,
    pub split_seed: u64,
    pub val_fraction: f64,
    pub write_holograms: bool,
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
}

impl GenerateOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        GenerateOptions {
            out_dir: out_dir.into(),
            canvas: EmbeddedCanvasSpec::default(),
            embedding: EmbeddingConfig::default(),
            block_size: 128,
            master_seed: 0,
            split_seed: 0,
            val_fraction: DEFAULT_VAL_FRACTION,
            write_holograms: true,
            jobs: 0,
        }
    }
}

/// Sorted `*.pgm` files in the glyph directory.
pub fn list_glyphs(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in rd {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "glyph source {} contains no .pgm files",
            dir.display()
        )));
    }
    Ok(files)
}

/// Grayscale conversion followed by a bilinear resize to `size x size`.
pub fn prepare_host(path: &Path, size: usize) -> Result<Image> {
    Ok(pgm::load_grayscale(path)?
        .resize_bilinear(size, size)
        .clamped())
}

fn rel(parts: &[&str]) -> String {
    parts.join("/")
}

struct SampleOutput {
    entry: SampleEntry,
    blocks: Vec<BlockRecord>,
}

fn create_dirs(out: &Path, holograms: bool) -> Result<()> {
    let mut dirs = vec![
        "hosts",
        "canvases",
        "reconstructions",
        "blocks/input",
        "blocks/target",
    ];
    if holograms {
        dirs.push("holograms");
    }
    for d in dirs {
        let p = out.join(d);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}

fn generate_sample(
    index: usize,
    host_path: &Path,
    glyph_files: &[PathBuf],
    split: Split,
    grid: &BlockGrid,
    opts: &GenerateOptions,
) -> Result<SampleOutput> {
    let id = format!("s{index:05}");
    let out = &opts.out_dir;
    let spec = &opts.canvas;

    let mut rng = seed::rng(seed::derive_seed(
        opts.master_seed,
        Stream::GlyphChoice,
        index as u64,
    ));
    let glyph_indices: Vec<usize> = (0..spec.glyph_count())
        .map(|_| seed::below(&mut rng, glyph_files.len() as u64) as usize)
        .collect();
    let glyphs = glyph_indices
        .iter()
        .map(|&g| pgm::read_pgm(&glyph_files[g]))
        .collect::<Result<Vec<_>>>()?;

    let host = prepare_host(host_path, spec.canvas_size)?;
    let canvas = build_embedded_canvas(spec, &glyphs)?;
    let phase_seed = seed::derive_seed(opts.master_seed, Stream::EmbedPhase, index as u64);
    let config = EmbeddingConfig {
        phase_seed,
        ..opts.embedding
    };
    let pkg = embedding::embed(&host, &canvas, &config)?;
    let recon = embedding::reconstruct(&pkg, Plane::Embed)?;

    let host_rel = rel(&["hosts", &format!("{id}.pgm")]);
    let canvas_rel = rel(&["canvases", &format!("{id}.pgm")]);
    let recon_rel = rel(&["reconstructions", &format!("{id}.pgm")]);
    pgm::write_pgm(out.join(&host_rel), &host)?;
    pgm::write_pgm(out.join(&canvas_rel), &canvas)?;
    pgm::write_pgm(out.join(&recon_rel), &recon)?;
    let hologram_path = if opts.write_holograms {
        let p = rel(&["holograms", &format!("{id}.holo")]);
        holo::write(out.join(&p), &pkg)?;
        Some(p)
    } else {
        None
    };

    let inputs = tile(&recon, grid)?;
    let targets = tile(&canvas, grid)?;
    let mut blocks = Vec::with_capacity(inputs.len());
    for (b, (input, target)) in inputs.iter().zip(&targets).enumerate() {
        let name = format!("{id}_b{b:04}.pgm");
        let input_rel = rel(&["blocks", "input", &name]);
        let target_rel = rel(&["blocks", "target", &name]);
        pgm::write_pgm(out.join(&input_rel), input)?;
        pgm::write_pgm(out.join(&target_rel), target)?;
        blocks.push(BlockRecord {
            sample_id: id.clone(),
            block_index: b,
            split,
            input_block_path: input_rel,
            target_block_path: target_rel,
        });
    }

    Ok(SampleOutput {
        entry: SampleEntry {
            sample_id: id,
            split,
            host_source: host_path.display().to_string(),
            host_path: host_rel,
            embedded_canvas_path: canvas_rel,
            hologram_path,
            reconstruction_path: recon_rel,
            glyph_indices,
            phase_seed,
            config,
        },
        blocks,
    })
}

/// Generates every sample (in parallel), then writes `manifest.jsonl` into
/// `opts.out_dir`. Output bytes depend only on the inputs and seeds.
pub fn generate_dataset(hosts: &[PathBuf], opts: &GenerateOptions) -> Result<DatasetManifest> {
    if hosts.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one host image is required".into(),
        ));
    }
    opts.canvas.validate()?;
    opts.embedding.validate()?;
    if !(0.0..1.0).contains(&opts.val_fraction) {
        return Err(Error::InvalidConfig(format!(
            "val fraction must lie in [0, 1), got {}",
            opts.val_fraction
        )));
    }
    let size = opts.canvas.canvas_size;
    if size < crate::optics::MIN_FIELD_SIZE || !size.is_power_of_two() {
        return Err(Error::InvalidConfig(format!(
            "canvas size must be a power of two >= {}, got {size}",
            crate::optics::MIN_FIELD_SIZE
        )));
    }
    let grid = BlockGrid::new(size, opts.block_size)?;
    let glyph_files = list_glyphs(&opts.canvas.glyph_source)?;
    create_dirs(&opts.out_dir, opts.write_holograms)?;

    let splits = assign_splits(hosts.len(), opts.val_fraction, opts.split_seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let outputs: Vec<SampleOutput> = pool.install(|| {
        hosts
            .par_iter()
            .enumerate()
            .map(|(i, h)| generate_sample(i, h, &glyph_files, splits[i], &grid, opts))
            .collect::<Result<_>>()
    })?;

    let mut entries = Vec::with_capacity(outputs.len());
    let mut block_records = Vec::new();
    for o in outputs {
        entries.push(o.entry);
        block_records.extend(o.blocks);
    }
    let manifest = DatasetManifest {
        header: ManifestHeader {
            version: MANIFEST_VERSION,
            rng: seed::PHASE_RNG_ID.into(),
            master_seed: opts.master_seed,
            split_seed: opts.split_seed,
            val_fraction: opts.val_fraction,
            block_size: opts.block_size,
            canvas: opts.canvas.clone(),
            samples: hosts.len(),
        },
        entries,
        block_records,
    };
    manifest.write(opts.out_dir.join("manifest.jsonl"))?;
    Ok(manifest)
}
