//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed. Pass substrings as arguments to filter.
//!
//!     cargo test -p hologlyph --test acceptance
//!     cargo test -p hologlyph --test acceptance -- metrics hwf1

use std::f64::consts::{PI, TAU};
use std::panic;
use std::time::{Duration, Instant};

use hologlyph::dataset::{build_embedded_canvas, tile, untile, BlockGrid, EmbeddedCanvasSpec};
use hologlyph::embedding::{self, EmbeddingConfig, Plane};
use hologlyph::metrics;
use hologlyph::nn::{self, ops, Network, NetworkSpec, Tensor, WeightStore};
use hologlyph::optics::{self, Complex64, ComplexField, PropagationParams};
use hologlyph::seed;
use hologlyph::Image;
use rand_chacha::ChaCha20Rng;

const LAMBDA: f64 = 633e-9;
const PITCH: f64 = 10e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

const fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        name: "propagation-round-trip",
        budget: secs(10),
        run: propagation_round_trip,
    },
    Criterion {
        name: "plane-wave",
        budget: secs(1),
        run: plane_wave,
    },
    Criterion {
        name: "rayleigh-sommerfeld-oracle",
        budget: secs(30),
        run: rayleigh_sommerfeld_oracle,
    },
    Criterion {
        name: "host-fidelity",
        budget: secs(10),
        run: host_fidelity,
    },
    Criterion {
        name: "embedded-dimness",
        budget: secs(10),
        run: embedded_dimness,
    },
    Criterion {
        name: "tile-bijection",
        budget: secs(10),
        run: tile_bijection,
    },
    Criterion {
        name: "conv-batchnorm-parity",
        budget: secs(30),
        run: conv_batchnorm_parity,
    },
    Criterion {
        name: "metrics",
        budget: secs(1),
        run: metrics_fixed_points,
    },
    Criterion {
        name: "restore-order-independence",
        budget: None,
        run: restore_order_independence,
    },
    Criterion {
        name: "hwf1-round-trip",
        budget: None,
        run: hwf1_round_trip,
    },
];

fn main() {
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let selected: Vec<&Criterion> = CRITERIA
        .iter()
        .filter(|c| filters.is_empty() || filters.iter().any(|f| c.name.contains(f.as_str())))
        .collect();

    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &selected {
        let start = Instant::now();
        let result = panic::catch_unwind(c.run);
        let elapsed = start.elapsed();
        let mut o = result.unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if let Some(b) = c.budget {
            if elapsed > b {
                o.pass = false;
                o.detail
                    .push_str(&format!("; over budget of {:.0} s", b.as_secs_f64()));
            }
        }
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:<28} {:>7.2}s  {}",
            if o.pass { "PASS" } else { "FAIL" },
            c.name,
            elapsed.as_secs_f64(),
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        selected.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn uniform(rng: &mut ChaCha20Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * seed::unit_f64(rng)
}

fn pick(rng: &mut ChaCha20Rng, lo: usize, hi_inclusive: usize) -> usize {
    lo + seed::below(rng, (hi_inclusive - lo + 1) as u64) as usize
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn propagation_round_trip() -> Outcome {
    let mut rng = seed::rng(101);
    let n = 256;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let data = (0..n * n)
            .map(|_| Complex64::new(uniform(&mut rng, -1.0, 1.0), uniform(&mut rng, -1.0, 1.0)))
            .collect();
        let f = ComplexField::new(n, n, PITCH, LAMBDA, data).unwrap();
        let fwd = optics::propagate(&f, PropagationParams::new(0.1, false)).unwrap();
        let back = optics::propagate(&fwd, PropagationParams::new(-0.1, false)).unwrap();
        let rel = max_abs_diff(back.data(), f.data()) / f.max_amplitude();
        worst = worst.max(rel);
    }
    outcome(
        worst < 1e-9,
        format!("max relative error {worst:.2e} (limit 1e-9)"),
    )
}

fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn plane_wave() -> Outcome {
    let n = 64;
    let mut amp_err: f64 = 0.0;
    let mut phase_err: f64 = 0.0;
    for z in [0.05, 0.1, -0.4, 1e-3] {
        let f =
            ComplexField::new(n, n, PITCH, LAMBDA, vec![Complex64::new(1.0, 0.0); n * n]).unwrap();
        let out = optics::propagate(&f, PropagationParams::new(z, false)).unwrap();
        let expected = (TAU * z / LAMBDA).rem_euclid(TAU);
        for v in out.data() {
            amp_err = amp_err.max((v.norm() - 1.0).abs());
            phase_err = phase_err.max(wrap_angle(v.arg() - expected).abs());
        }
    }
    outcome(
        amp_err <= 1e-9 && phase_err <= 1e-6,
        format!("amplitude error {amp_err:.2e} (limit 1e-9), phase error {phase_err:.2e} rad (limit 1e-6)"),
    )
}

/// First Rayleigh–Sommerfeld impulse response for a point source of area
/// `pitch²` at lateral offset `(dx, dy)` and axial distance `z`.
fn rs_point_source(dx: f64, dy: f64, z: f64) -> Complex64 {
    let k = TAU / LAMBDA;
    let r = (dx * dx + dy * dy + z * z).sqrt();
    let obliquity = z / (TAU * r * r);
    let radial = Complex64::new(1.0 / r, -k);
    PITCH * PITCH * obliquity * radial * Complex64::from_polar(1.0, k * r)
}

fn rayleigh_sommerfeld_oracle() -> Outcome {
    let n = 256;
    let z = 0.05;
    let c = n / 2;
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    data[c * n + c] = Complex64::new(1.0, 0.0);
    let f = ComplexField::new(n, n, PITCH, LAMBDA, data).unwrap();
    let out = optics::propagate(&f, PropagationParams::new(z, true)).unwrap();

    // Radius at which the local frequency of the impulse response reaches
    // the band limit.
    let fl = optics::band_limit_frequency(n, PITCH, LAMBDA, z);
    let s = LAMBDA * fl;
    let valid_px = z * s / (1.0 - s * s).sqrt() / PITCH;
    let mut worst: f64 = 0.0;
    let mut probes = 0;
    for frac in [0.15, 0.35, 0.55, 0.75] {
        for angle in [0.0f64, 0.6, 1.9, 4.0] {
            let r = frac * valid_px;
            let px = (c as f64 + r * angle.cos()).round() as usize;
            let py = (c as f64 + r * angle.sin()).round() as usize;
            let dx = (px as f64 - c as f64) * PITCH;
            let dy = (py as f64 - c as f64) * PITCH;
            let oracle = rs_point_source(dx, dy, z).norm();
            let got = out.get(px, py).norm();
            worst = worst.max((got - oracle).abs() / oracle);
            probes += 1;
        }
    }
    outcome(
        worst <= 1e-3,
        format!(
            "{probes} probes within {valid_px:.0} px of the source, max relative amplitude error {worst:.2e} (limit 1e-3)"
        ),
    )
}

fn test_host(n: usize) -> Image {
    Image::from_fn(n, n, |x, y| {
        let (u, v) = (x as f64 / n as f64, y as f64 / n as f64);
        let smooth = 0.45 + 0.2 * (11.0 * u + 3.0 * v).sin() * (7.0 * v).cos();
        let edge = if (u - 0.6).powi(2) + (v - 0.4).powi(2) < 0.04 {
            0.25
        } else {
            0.0
        };
        (smooth + edge + 0.05 * (53.0 * u * v).sin()).clamp(0.0, 1.0)
    })
}

/// Stroke-like synthetic glyphs: rings, bars and diagonals.
fn test_glyph(index: usize, size: usize) -> Image {
    let s = size as f64;
    Image::from_fn(size, size, |x, y| {
        let (u, v) = (x as f64 / s - 0.5, y as f64 / s - 0.5);
        let ink = match index % 3 {
            0 => ((u * u + v * v).sqrt() - 0.3).abs() < 0.07,
            1 => u.abs() < 0.08 && v.abs() < 0.38,
            _ => (u - v).abs() < 0.1 && u.abs() < 0.35,
        };
        if ink {
            1.0
        } else {
            0.0
        }
    })
}

fn test_canvas(n: usize) -> Image {
    let spec = EmbeddedCanvasSpec {
        canvas_size: n,
        glyph_size: n / 16,
        rows: 8,
        cols: 8,
        offset: (n / 8, n / 8),
        ..Default::default()
    };
    let glyphs: Vec<Image> = (0..64).map(|i| test_glyph(i, 28)).collect();
    build_embedded_canvas(&spec, &glyphs).unwrap()
}

fn host_fidelity() -> Outcome {
    let n = 512;
    let cfg = EmbeddingConfig {
        alpha: 0.04,
        ..Default::default()
    };
    let host = test_host(n);
    let payload = test_canvas(n);
    let parts = embedding::components(&host, &payload, &cfg).unwrap();
    let without =
        optics::amplitude(&embedding::back_propagate(&parts.host, &cfg, Plane::Host).unwrap())
            .rescaled_to_max();
    let pkg = embedding::embed(&host, &payload, &cfg).unwrap();
    let with = embedding::reconstruct(&pkg, Plane::Host).unwrap();
    let db = metrics::psnr(&with, &without).unwrap();
    outcome(
        db >= 30.0,
        format!("host-plane PSNR with vs without payload {db:.2} dB (limit >= 30)"),
    )
}

fn masked_mean(img: &Image, mask: &[bool]) -> f64 {
    let (sum, count) = img
        .data()
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold((0.0, 0usize), |(s, c), (v, _)| (s + v, c + 1));
    sum / count as f64
}

fn embedded_dimness() -> Outcome {
    let n = 512;
    let cfg = EmbeddingConfig::default();
    let host = test_host(n);
    let payload = test_canvas(n);
    let mask: Vec<bool> = payload.data().iter().map(|&v| v > 0.5).collect();
    let parts = embedding::components(&host, &payload, &cfg).unwrap();

    let isolated = |alpha: f64| {
        let focused =
            embedding::back_propagate(&parts.embedded.scaled(alpha.into()), &cfg, Plane::Embed)
                .unwrap();
        masked_mean(&optics::amplitude(&focused), &mask)
    };
    let ratio = isolated(cfg.alpha) / isolated(1.0);

    let composite = |alpha: f64| {
        let field = parts.compose(alpha).unwrap();
        let focused = embedding::back_propagate(&field, &cfg, Plane::Embed).unwrap();
        masked_mean(&optics::amplitude(&focused), &mask)
    };
    let composite_ratio = composite(cfg.alpha) / composite(1.0);

    outcome(
        (0.02..=0.08).contains(&ratio),
        format!(
            "embedded-term digit-region ratio {ratio:.4} at alpha {} (band 0.02..0.08); composite field ratio {composite_ratio:.3} for reference",
            cfg.alpha
        ),
    )
}

fn tile_bijection() -> Outcome {
    let mut rng = seed::rng(606);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let block = 1 << pick(&mut rng, 0, 5);
        let per_side = pick(&mut rng, 1, 8);
        let size = block * per_side;
        let data = (0..size * size)
            .map(|_| uniform(&mut rng, -2.0, 2.0))
            .collect();
        let frame = Image::new(size, size, data).unwrap();
        let grid = BlockGrid::new(size, block).unwrap();
        let blocks = tile(&frame, &grid).unwrap();
        let back = untile(&blocks, &grid).unwrap();
        if blocks.len() != per_side * per_side || back.data() != frame.data() {
            mismatches += 1;
        }
    }
    let paper_grid = BlockGrid::new(2048, 128).unwrap().block_count();
    let pass = mismatches == 0 && paper_grid == 256 && paper_grid * 300 == 76_800;
    outcome(
        pass,
        format!("1000 frames, {mismatches} mismatches; 2048/128 grid has {paper_grid} blocks, x300 = {}", paper_grid * 300),
    )
}

fn conv_oracle(input: &Tensor, kernel: &Tensor, bias: &[f32]) -> Vec<f64> {
    let (cin, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (cout, kh, kw) = (kernel.shape()[0], kernel.shape()[2], kernel.shape()[3]);
    let at = |c: usize, y: isize, x: isize| {
        if y < 0 || x < 0 || y >= h as isize || x >= w as isize {
            0.0
        } else {
            input.data()[(c * h + y as usize) * w + x as usize] as f64
        }
    };
    let mut out = vec![0.0; cout * h * w];
    for o in 0..cout {
        for y in 0..h {
            for x in 0..w {
                let mut acc = bias[o] as f64;
                for c in 0..cin {
                    for ky in 0..kh {
                        for kx in 0..kw {
                            let wv = kernel.data()[((o * cin + c) * kh + ky) * kw + kx] as f64;
                            let iy = y as isize + ky as isize - (kh / 2) as isize;
                            let ix = x as isize + kx as isize - (kw / 2) as isize;
                            acc += wv * at(c, iy, ix);
                        }
                    }
                }
                out[(o * h + y) * w + x] = acc;
            }
        }
    }
    out
}

fn random_tensor(rng: &mut ChaCha20Rng, shape: Vec<usize>, lo: f64, hi: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| uniform(rng, lo, hi) as f32).collect()).unwrap()
}

fn worst_diff(got: &Tensor, want: &[f64]) -> f64 {
    got.data()
        .iter()
        .zip(want)
        .map(|(&g, &w)| (g as f64 - w).abs())
        .fold(0.0, f64::max)
}

fn conv_batchnorm_parity() -> Outcome {
    let mut rng = seed::rng(707);
    let mut conv_worst: f64 = 0.0;
    for _ in 0..150 {
        let cin = pick(&mut rng, 1, 4);
        let cout = pick(&mut rng, 1, 5);
        let k = [1, 3, 5][pick(&mut rng, 0, 2)];
        let (h, w) = (pick(&mut rng, 1, 14), pick(&mut rng, 1, 14));
        let input = random_tensor(&mut rng, vec![cin, h, w], -1.0, 1.0);
        let kernel = random_tensor(&mut rng, vec![cout, cin, k, k], -0.5, 0.5);
        let bias: Vec<f32> = (0..cout)
            .map(|_| uniform(&mut rng, -0.5, 0.5) as f32)
            .collect();
        let got = ops::conv2d(&input, &kernel, &bias).unwrap();
        conv_worst = conv_worst.max(worst_diff(&got, &conv_oracle(&input, &kernel, &bias)));
    }

    let mut bn_worst: f64 = 0.0;
    for _ in 0..150 {
        let c = pick(&mut rng, 1, 6);
        let (h, w) = (pick(&mut rng, 1, 12), pick(&mut rng, 1, 12));
        let input = random_tensor(&mut rng, vec![c, h, w], -2.0, 2.0);
        let mut param =
            |lo, hi| -> Vec<f32> { (0..c).map(|_| uniform(&mut rng, lo, hi) as f32).collect() };
        let (gamma, beta, mean, var) = (
            param(0.5, 1.5),
            param(-0.5, 0.5),
            param(-0.5, 0.5),
            param(0.1, 2.0),
        );
        let eps = uniform(&mut rng, 1e-5, 1e-2) as f32;
        let got = ops::batch_norm(&input, &gamma, &beta, &mean, &var, eps).unwrap();
        let plane = h * w;
        let want: Vec<f64> = input
            .data()
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let ch = i / plane;
                gamma[ch] as f64 * (x as f64 - mean[ch] as f64)
                    / (var[ch] as f64 + eps as f64).sqrt()
                    + beta[ch] as f64
            })
            .collect();
        bn_worst = bn_worst.max(worst_diff(&got, &want));
    }
    outcome(
        conv_worst <= 1e-5 && bn_worst <= 1e-5,
        format!("150+150 cases, conv2d max error {conv_worst:.2e}, batch-norm max error {bn_worst:.2e} (limit 1e-5)"),
    )
}

fn metrics_fixed_points() -> Outcome {
    let mut rng = seed::rng(808);
    let x = Image::from_fn(96, 80, |_, _| uniform(&mut rng, 0.0, 0.9));
    let shifted = Image::from_fn(96, 80, |i, j| x.get(i, j) + 0.1);
    let same = metrics::psnr(&x, &x).unwrap();
    let twenty = metrics::psnr(&x, &shifted).unwrap();
    let s = metrics::ssim(&x, &x).unwrap();
    outcome(
        same == 99.0 && (twenty - 20.0).abs() <= 1e-6 && s == 1.0,
        format!("psnr(x,x) = {same} dB, psnr(x,x+0.1) = {twenty:.9} dB, ssim(x,x) = {s}"),
    )
}

fn shuffled(n: usize, rng: &mut ChaCha20Rng) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        v.swap(i, seed::below(rng, i as u64 + 1) as usize);
    }
    v
}

fn restore_order_independence() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = seed::rng(909);
    let mut checked = Vec::new();
    for (label, spec) in [
        ("unet", NetworkSpec::default_unet()),
        ("resnet", NetworkSpec::default_resnet()),
    ] {
        let spec_path = dir.path().join(format!("{label}.json"));
        let weights_path = dir.path().join(format!("{label}.hwf"));
        spec.write(&spec_path).unwrap();
        WeightStore::random(&spec, 42)
            .unwrap()
            .write(&weights_path)
            .unwrap();
        let net = Network::new(
            NetworkSpec::read(&spec_path).unwrap(),
            &WeightStore::read(&weights_path).unwrap(),
        )
        .unwrap();

        let size = 2 * net.block_size();
        let frame = Image::from_fn(size, size, |_, _| seed::unit_f64(&mut rng));
        let grid = BlockGrid::new(size, net.block_size()).unwrap();
        let parallel = nn::restore_frame(&net, &frame, &grid).unwrap();
        let count = grid.block_count();
        let orders = [
            (0..count).collect::<Vec<_>>(),
            (0..count).rev().collect(),
            shuffled(count, &mut rng),
        ];
        for order in &orders {
            let seq = nn::restore_frame_in_order(&net, &frame, &grid, order).unwrap();
            if seq.data() != parallel.data() {
                return outcome(
                    false,
                    format!("{label}: order {order:?} differs from parallel restore"),
                );
            }
        }
        checked.push(format!(
            "{label} ({count} blocks, {} orders)",
            orders.len() + 1
        ));
    }
    outcome(
        true,
        format!("bit-identical frames for {}", checked.join(", ")),
    )
}

fn hwf1_round_trip() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut files = 0;
    for (i, spec) in [NetworkSpec::default_unet(), NetworkSpec::default_resnet()]
        .iter()
        .enumerate()
    {
        for s in 0..3u64 {
            let first = dir.path().join(format!("w{i}_{s}_a.hwf"));
            let second = dir.path().join(format!("w{i}_{s}_b.hwf"));
            WeightStore::random(spec, s).unwrap().write(&first).unwrap();
            WeightStore::read(&first).unwrap().write(&second).unwrap();
            if std::fs::read(&first).unwrap() != std::fs::read(&second).unwrap() {
                return outcome(
                    false,
                    format!("{} differs after re-writing", first.display()),
                );
            }
            files += 1;
        }
    }
    outcome(
        true,
        format!("{files} random weight files byte-identical after write -> read -> write"),
    )
}
