//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{GridShape, RunConfig, SEED_ENV};
use crate::dataset::{self, BlockGrid, GenerateOptions, Split};
use crate::embedding::{self, Plane};
use crate::error::Error;
use crate::metrics::{self, QualityReport};
use crate::nn::{self, Network, NetworkSpec, ResnetConfig, UnetConfig, WeightStore};
use crate::raster::Image;
use crate::{holo, pgm};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

const IMAGE_EXTENSIONS: &[&str] = &[
    "png", "jpg", "jpeg", "bmp", "pgm", "ppm", "pnm", "tif", "tiff",
];

#[derive(Parser, Debug)]
#[command(
    name = "hologlyph",
    version,
    about = "Hide images inside digital holograms and recover them"
)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// TOML run configuration; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Host (cover) image, or a directory of hosts for dataset-gen
    #[arg(long, global = true, value_name = "PATH")]
    host: Option<PathBuf>,
    /// Image to hide (any grayscale or RGB raster)
    #[arg(long, global = true, value_name = "FILE")]
    payload: Option<PathBuf>,
    /// Output file or directory
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Embedding strength, dimensionless amplitude ratio [default: 0.04]
    #[arg(long, global = true, value_name = "RATIO")]
    alpha: Option<f64>,
    /// Host propagation distance in metres [default: -0.4]
    #[arg(
        long,
        global = true,
        value_name = "METRES",
        allow_negative_numbers = true
    )]
    z_host: Option<f64>,
    /// Hidden-image propagation distance in metres [default: 0.4]
    #[arg(
        long,
        global = true,
        value_name = "METRES",
        allow_negative_numbers = true
    )]
    z_embed: Option<f64>,
    /// Wavelength in metres [default: 6.33e-7]
    #[arg(long, global = true, value_name = "METRES")]
    wavelength: Option<f64>,
    /// Sampling pitch in metres per pixel [default: 1e-5]
    #[arg(long, global = true, value_name = "METRES")]
    pitch: Option<f64>,
    /// Apply the band-limited transfer function (true/false)
    #[arg(long, global = true, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    band_limit: Option<bool>,
    /// Apply a random phase to the host as well (true/false)
    #[arg(long, global = true, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    host_random_phase: Option<bool>,
    /// Master seed (falls back to $HOLOGLYPH_SEED, then 0)
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Seed for the train/val split [default: 0]
    #[arg(long, global = true, value_name = "U64")]
    split_seed: Option<u64>,
    /// Square frame side in pixels, a power of two [default: 2048]
    #[arg(long, global = true, value_name = "PIXELS")]
    size: Option<usize>,
    /// Restoration block side in pixels [default: 128]
    #[arg(long, global = true, value_name = "PIXELS")]
    block_size: Option<usize>,
    /// Side of one glyph cell in pixels [default: 128]
    #[arg(long, global = true, value_name = "PIXELS")]
    glyph_size: Option<usize>,
    /// Glyph grid as ROWSxCOLS [default: 8x8]
    #[arg(long, global = true, value_name = "ROWSxCOLS")]
    grid: Option<GridShape>,
    /// Glyph grid top-left corner in pixels, as X,Y [default: 0,0]
    #[arg(long, global = true, value_name = "X,Y", value_parser = parse_offset)]
    offset: Option<[usize; 2]>,
    /// Fraction of samples held out for validation [default: 5/300]
    #[arg(long, global = true, value_name = "FRACTION")]
    val_fraction: Option<f64>,
    /// Worker threads, 0 for one per logical CPU [default: 0]
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Network weights (HWF1)
    #[arg(long, global = true, value_name = "FILE")]
    weights: Option<PathBuf>,
    /// Network architecture description (JSON)
    #[arg(long, global = true, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Directory of glyph images (*.pgm)
    #[arg(long, global = true, value_name = "DIR")]
    glyphs: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hide --payload inside --host and write a .holo hologram to --out
    Embed,
    /// Back-propagate a .holo hologram to one plane and write the amplitude
    Reconstruct {
        /// Hologram file (.holo)
        hologram: PathBuf,
        /// Plane to reconstruct: host or embed
        #[arg(long, default_value = "embed")]
        plane: Plane,
    },
    /// Build a paired training corpus (blocks + manifest.jsonl) in --out
    DatasetGen {
        /// Host images or directories of host images (also taken from --host)
        hosts: Vec<PathBuf>,
        /// Skip writing .holo files
        #[arg(long)]
        no_holograms: bool,
    },
    /// Restore a degraded reconstruction block by block with a CNN
    Restore {
        /// Reconstruction image, or a .holo hologram (reconstructed first)
        input: PathBuf,
        /// Plane used when the input is a hologram
        #[arg(long, default_value = "embed")]
        plane: Plane,
    },
    /// PSNR / SSIM of restored images against ground truth, as JSON
    Eval {
        /// Restored image or directory
        restored: PathBuf,
        /// Ground-truth image or directory (paired by file name)
        truth: PathBuf,
    },
    /// Extract glyphs from an uncompressed IDX image archive into --out
    IngestMnist {
        /// IDX3 image file (gunzip first)
        archive: PathBuf,
        /// Extract at most this many glyphs
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Write a default network description to --spec and random weights to --weights
    RandomWeights {
        #[arg(long, value_enum, default_value = "unet")]
        arch: Arch,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Arch {
    Unet,
    Resnet,
}

fn parse_offset(s: &str) -> Result<[usize; 2], String> {
    let (x, y) = s.split_once(',').ok_or("expected X,Y")?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok([p(x)?, p(y)?])
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn resolve(g: &GlobalOpts) -> CliResult<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let e = &mut cfg.embedding;
    if let Some(v) = g.alpha {
        e.alpha = v;
    }
    if let Some(v) = g.z_host {
        e.z_host = v;
    }
    if let Some(v) = g.z_embed {
        e.z_embed = v;
    }
    if let Some(v) = g.wavelength {
        e.wavelength = v;
    }
    if let Some(v) = g.pitch {
        e.pitch = v;
    }
    if let Some(v) = g.band_limit {
        e.band_limit = v;
    }
    if let Some(v) = g.host_random_phase {
        e.host_random_phase = v;
    }
    if g.seed.is_some() {
        cfg.seed = g.seed;
    }
    if let Some(v) = g.split_seed {
        cfg.split_seed = v;
    }
    if let Some(v) = g.size {
        cfg.size = v;
    }
    if let Some(v) = g.block_size {
        cfg.block_size = v;
    }
    if let Some(v) = g.glyph_size {
        cfg.glyph_size = v;
    }
    if let Some(v) = g.grid {
        cfg.grid = v;
    }
    if let Some(v) = g.offset {
        cfg.offset = v;
    }
    if let Some(v) = g.val_fraction {
        cfg.val_fraction = v;
    }
    if let Some(v) = g.jobs {
        cfg.jobs = v;
    }
    let p = &mut cfg.paths;
    for (flag, slot) in [
        (&g.host, &mut p.host),
        (&g.payload, &mut p.payload),
        (&g.out, &mut p.out),
        (&g.weights, &mut p.weights),
        (&g.spec, &mut p.spec),
        (&g.glyphs, &mut p.glyphs),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    let env_seed = std::env::var(SEED_ENV).ok();
    Ok(cfg.resolve(env_seed.as_deref())?)
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Failure::Usage(format!("{flag} is required for this command")))
}

fn execute(cli: Cli) -> CliResult<()> {
    let cfg = resolve(&cli.opts)?;
    eprintln!(
        "# resolved configuration\n{}# end configuration",
        cfg.to_toml()
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Embed => cmd_embed(&cfg),
        Command::Reconstruct { hologram, plane } => cmd_reconstruct(&cfg, &hologram, plane),
        Command::DatasetGen {
            hosts,
            no_holograms,
        } => cmd_dataset_gen(&cfg, hosts, no_holograms),
        Command::Restore { input, plane } => cmd_restore(&cfg, &input, plane),
        Command::Eval { restored, truth } => cmd_eval(&cfg, &restored, &truth),
        Command::IngestMnist { archive, limit } => cmd_ingest(&cfg, &archive, limit),
        Command::RandomWeights { arch } => cmd_random_weights(&cfg, arch),
    })
}

fn cmd_embed(cfg: &RunConfig) -> CliResult<()> {
    let host_path = required(&cfg.paths.host, "--host")?;
    let payload_path = required(&cfg.paths.payload, "--payload")?;
    let out = required(&cfg.paths.out, "--out")?;
    let host = dataset::prepare_host(host_path, cfg.size)?;
    let payload = dataset::prepare_host(payload_path, cfg.size)?;
    let pkg = embedding::embed(&host, &payload, &cfg.embedding)?;
    holo::write(out, &pkg)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn cmd_reconstruct(cfg: &RunConfig, hologram: &Path, plane: Plane) -> CliResult<()> {
    let out = required(&cfg.paths.out, "--out")?;
    let pkg = holo::read(hologram)?;
    let img = embedding::reconstruct(&pkg, plane)?;
    pgm::save_image(out, &img)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn is_image(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

/// Files are kept as given; directories expand to their sorted image files.
fn expand_images(paths: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found = Vec::new();
            for entry in fs::read_dir(p).map_err(|e| Error::io(p, e))? {
                let f = entry.map_err(|e| Error::io(p, e))?.path();
                if f.is_file() && is_image(&f) {
                    found.push(f);
                }
            }
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct DatasetSummary {
    samples: usize,
    train_samples: usize,
    val_samples: usize,
    train_blocks: usize,
    val_blocks: usize,
}

fn cmd_dataset_gen(cfg: &RunConfig, mut hosts: Vec<PathBuf>, no_holograms: bool) -> CliResult<()> {
    let out = required(&cfg.paths.out, "--out")?;
    required(&cfg.paths.glyphs, "--glyphs")?;
    if let Some(h) = &cfg.paths.host {
        hosts.push(h.clone());
    }
    if hosts.is_empty() {
        return Err(Failure::Usage(
            "no host images given (positional or --host)".into(),
        ));
    }
    let hosts = expand_images(&hosts)?;
    let opts = GenerateOptions {
        out_dir: out.to_path_buf(),
        canvas: cfg.canvas_spec(),
        embedding: cfg.embedding,
        block_size: cfg.block_size,
        master_seed: cfg.master_seed(),
        split_seed: cfg.split_seed,
        val_fraction: cfg.val_fraction,
        write_holograms: !no_holograms,
        jobs: cfg.jobs,
    };
    let m = dataset::generate_dataset(&hosts, &opts)?;
    let summary = DatasetSummary {
        samples: m.entries.len(),
        train_samples: m.sample_count(Split::Train),
        val_samples: m.sample_count(Split::Val),
        train_blocks: m.block_count(Split::Train),
        val_blocks: m.block_count(Split::Val),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    );
    Ok(())
}

fn load_network(cfg: &RunConfig) -> CliResult<Network> {
    let spec = NetworkSpec::read(required(&cfg.paths.spec, "--spec")?)?;
    let weights = WeightStore::read(required(&cfg.paths.weights, "--weights")?)?;
    Ok(Network::new(spec, &weights)?)
}

fn cmd_restore(cfg: &RunConfig, input: &Path, plane: Plane) -> CliResult<()> {
    let out = required(&cfg.paths.out, "--out")?;
    let net = load_network(cfg)?;
    if net.block_size() != cfg.block_size {
        return Err(Error::InvalidConfig(format!(
            "network expects {0}x{0} blocks but block size is {1}",
            net.block_size(),
            cfg.block_size
        ))
        .into());
    }
    let frame: Image = if holo::sniff(input)? {
        embedding::reconstruct(&holo::read(input)?, plane)?
    } else {
        pgm::load_grayscale(input)?
    };
    let (w, h) = frame.dims();
    if w != h {
        return Err(Error::DimensionMismatch(format!("frame must be square, got {w}x{h}")).into());
    }
    let grid = BlockGrid::new(w, cfg.block_size)?;
    let restored = nn::restore_frame(&net, &frame, &grid)?;
    pgm::save_image(out, &restored)?;
    eprintln!("wrote {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct ImageScore {
    name: String,
    #[serde(flatten)]
    report: QualityReport,
}

#[derive(Serialize)]
struct EvalReport {
    count: usize,
    mean_psnr_db: f64,
    mean_ssim: f64,
    images: Vec<ImageScore>,
}

fn cmd_eval(cfg: &RunConfig, restored: &Path, truth: &Path) -> CliResult<()> {
    let pairs: Vec<(String, PathBuf, PathBuf)> = if restored.is_dir() {
        let files = expand_images(&[restored.to_path_buf()])?;
        if files.is_empty() {
            return Err(
                Error::InvalidConfig(format!("{} holds no images", restored.display())).into(),
            );
        }
        files
            .into_iter()
            .map(|f| {
                let name = f
                    .file_name()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned();
                let t = truth.join(&name);
                (name, f, t)
            })
            .collect()
    } else {
        let name = restored
            .file_name()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        vec![(name, restored.to_path_buf(), truth.to_path_buf())]
    };
    let mut images = Vec::with_capacity(pairs.len());
    for (name, r, t) in pairs {
        let report = metrics::evaluate(&pgm::load_grayscale(&r)?, &pgm::load_grayscale(&t)?)?;
        images.push(ImageScore { name, report });
    }
    let n = images.len() as f64;
    let report = EvalReport {
        count: images.len(),
        mean_psnr_db: images.iter().map(|s| s.report.psnr_db).sum::<f64>() / n,
        mean_ssim: images.iter().map(|s| s.report.ssim).sum::<f64>() / n,
        images,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(out) = &cfg.paths.out {
        fs::write(out, format!("{json}\n")).map_err(|e| Error::io(out, e))?;
    }
    println!("{json}");
    Ok(())
}

fn cmd_ingest(cfg: &RunConfig, archive: &Path, limit: Option<usize>) -> CliResult<()> {
    let out = required(&cfg.paths.out, "--out")?;
    let n = dataset::idx::ingest_idx(archive, out, limit)?;
    eprintln!("wrote {n} glyphs to {}", out.display());
    Ok(())
}

fn cmd_random_weights(cfg: &RunConfig, arch: Arch) -> CliResult<()> {
    let spec_path = required(&cfg.paths.spec, "--spec")?;
    let weights_path = required(&cfg.paths.weights, "--weights")?;
    let spec = match arch {
        Arch::Unet => NetworkSpec::unet(&UnetConfig::default(), cfg.block_size),
        Arch::Resnet => NetworkSpec::resnet(&ResnetConfig::default(), cfg.block_size),
    };
    spec.infer_shapes()?;
    let weights = WeightStore::random(&spec, cfg.master_seed())?;
    spec.write(spec_path)?;
    weights.write(weights_path)?;
    eprintln!(
        "wrote {} and {} ({} tensors)",
        spec_path.display(),
        weights_path.display(),
        weights.len()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("run.toml");
        fs::write(
            &cfg_path,
            "size = 256\nseed = 9\n[embedding]\nalpha = 0.2\n",
        )
        .unwrap();
        let cli = Cli::try_parse_from([
            "hologlyph",
            "embed",
            "--config",
            cfg_path.to_str().unwrap(),
            "--alpha",
            "0.05",
            "--z-host",
            "-0.3",
        ])
        .unwrap();
        let cfg = resolve(&cli.opts).ok().unwrap();
        assert_eq!(cfg.size, 256);
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.embedding.alpha, 0.05);
        assert_eq!(cfg.embedding.z_host, -0.3);
    }

    #[test]
    fn offset_parsing() {
        assert_eq!(parse_offset("3, 4").unwrap(), [3, 4]);
        assert!(parse_offset("3").is_err());
    }
}
