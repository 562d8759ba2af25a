use std::ffi::{CStr, CString};
use std::ptr;

use hologlyph::nn::{NetworkSpec, ResnetConfig, WeightStore};
use hologlyph_ffi::*;

fn image(n: usize, f: impl Fn(usize, usize) -> f64) -> *mut HgImage {
    let data: Vec<f64> = (0..n * n).map(|i| f(i % n, i / n)).collect();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { hg_image_new(n, n, data.as_ptr(), &mut out) },
        HgStatus::Ok
    );
    out
}

fn last_error() -> String {
    let p = hg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn cpath(p: &std::path::Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(hg_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn embed_reconstruct_and_metrics() {
    let n = 64;
    let host = image(n, |x, y| {
        0.5 + 0.4 * ((x as f64) / 9.0).sin() * ((y as f64) / 7.0).cos()
    });
    let payload = image(n, |x, y| if x < 20 && y % 6 < 3 { 1.0 } else { 0.0 });

    let mut cfg = hg_embed_config_default();
    assert_eq!(cfg.alpha, 0.04);
    cfg.alpha = 1e-12;
    cfg.phase_seed = 8;
    let mut holo = ptr::null_mut();
    unsafe {
        assert_eq!(hg_embed(host, payload, &cfg, &mut holo), HgStatus::Ok);
        let mut back = hg_embed_config_default();
        assert_eq!(hg_hologram_config(holo, &mut back), HgStatus::Ok);
        assert_eq!(back.phase_seed, 8);

        let mut recon = ptr::null_mut();
        assert_eq!(
            hg_reconstruct(holo, HgPlane::Host, &mut recon),
            HgStatus::Ok
        );
        assert_eq!((hg_image_width(recon), hg_image_height(recon)), (n, n));
        let mut host_max = 0.0f64;
        let host_data = std::slice::from_raw_parts(hg_image_data(host), n * n);
        host_data.iter().for_each(|&v| host_max = host_max.max(v));
        let recon_data = std::slice::from_raw_parts(hg_image_data(recon), n * n);
        for (r, h) in recon_data.iter().zip(host_data) {
            assert!((r - h / host_max).abs() < 1e-6);
        }

        let mut psnr = 0.0;
        assert_eq!(hg_psnr(recon, recon, &mut psnr), HgStatus::Ok);
        assert_eq!(psnr, 99.0);
        let mut ssim = 0.0;
        assert_eq!(hg_ssim(host, host, &mut ssim), HgStatus::Ok);
        assert_eq!(ssim, 1.0);

        hg_image_free(recon);
        hg_hologram_free(holo);
        hg_image_free(host);
        hg_image_free(payload);
    }
}

#[test]
fn files_round_trip_through_handles() {
    let dir = tempfile::tempdir().unwrap();
    let n = 32;
    let host = image(n, |x, _| x as f64 / n as f64);
    let payload = image(n, |_, y| (y % 2) as f64);
    unsafe {
        let mut holo = ptr::null_mut();
        assert_eq!(
            hg_embed(host, payload, ptr::null(), &mut holo),
            HgStatus::Ok
        );
        let hp = cpath(&dir.path().join("x.holo"));
        assert_eq!(hg_hologram_save(holo, hp.as_ptr()), HgStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(hg_hologram_load(hp.as_ptr(), &mut loaded), HgStatus::Ok);

        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(hg_reconstruct(holo, HgPlane::Embed, &mut a), HgStatus::Ok);
        assert_eq!(hg_reconstruct(loaded, HgPlane::Embed, &mut b), HgStatus::Ok);
        let da = std::slice::from_raw_parts(hg_image_data(a), n * n);
        let db = std::slice::from_raw_parts(hg_image_data(b), n * n);
        assert_eq!(da, db);

        let ip = cpath(&dir.path().join("a.png"));
        assert_eq!(hg_image_save(a, ip.as_ptr()), HgStatus::Ok);
        let mut reread = ptr::null_mut();
        assert_eq!(hg_image_load(ip.as_ptr(), &mut reread), HgStatus::Ok);
        assert_eq!(hg_image_width(reread), n);

        for img in [a, b, reread, host, payload] {
            hg_image_free(img);
        }
        hg_hologram_free(holo);
        hg_hologram_free(loaded);
    }
}

#[test]
fn network_restores_frames() {
    let dir = tempfile::tempdir().unwrap();
    let spec = NetworkSpec::resnet(
        &ResnetConfig {
            filters: 4,
            modules: 2,
            kernel: 3,
        },
        16,
    );
    let sp = dir.path().join("net.json");
    let wp = dir.path().join("net.hwf");
    spec.write(&sp).unwrap();
    WeightStore::random(&spec, 2).unwrap().write(&wp).unwrap();
    let (sp, wp) = (cpath(&sp), cpath(&wp));
    unsafe {
        let mut net = ptr::null_mut();
        assert_eq!(
            hg_network_load(sp.as_ptr(), wp.as_ptr(), &mut net),
            HgStatus::Ok
        );
        assert_eq!(hg_network_block_size(net), 16);
        let frame = image(32, |x, y| ((x + y) % 5) as f64 / 4.0);
        let mut out = ptr::null_mut();
        assert_eq!(hg_restore_frame(net, frame, &mut out), HgStatus::Ok);
        let data = std::slice::from_raw_parts(hg_image_data(out), 32 * 32);
        assert!(data.iter().all(|v| (0.0..=1.0).contains(v)));

        let odd = image(24, |_, _| 0.0);
        let mut none = ptr::null_mut();
        assert_eq!(hg_restore_frame(net, odd, &mut none), HgStatus::Shape);
        assert!(none.is_null());
        assert!(!last_error().is_empty());

        for img in [frame, out, odd] {
            hg_image_free(img);
        }
        hg_network_free(net);

        let mut bad = ptr::null_mut();
        assert_eq!(
            hg_network_load(wp.as_ptr(), wp.as_ptr(), &mut bad),
            HgStatus::Format
        );
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(
            hg_image_new(2, 2, ptr::null(), &mut out),
            HgStatus::NullPointer
        );
        assert!(last_error().contains("data"));

        let missing = CString::new("/nonexistent/holo.holo").unwrap();
        let mut holo = ptr::null_mut();
        assert_eq!(hg_hologram_load(missing.as_ptr(), &mut holo), HgStatus::Io);
        assert!(last_error().contains("/nonexistent/holo.holo"));

        let small = image(16, |_, _| 0.5);
        let other = image(32, |_, _| 0.5);
        let mut v = 0.0;
        assert_eq!(hg_psnr(small, other, &mut v), HgStatus::Shape);
        assert_eq!(
            hg_psnr(small, small, ptr::null_mut()),
            HgStatus::NullPointer
        );

        let mut cfg = hg_embed_config_default();
        cfg.alpha = 0.0;
        assert_eq!(
            hg_embed(small, small, &cfg, &mut holo),
            HgStatus::InvalidArgument
        );
        assert!(last_error().contains("alpha"));

        let not_pow2 = image(20, |_, _| 0.5);
        assert_eq!(
            hg_embed(not_pow2, not_pow2, ptr::null(), &mut holo),
            HgStatus::InvalidArgument
        );

        assert_eq!(hg_psnr(small, small, &mut v), HgStatus::Ok);
        assert!(hg_last_error_message().is_null());

        for img in [small, other, not_pow2] {
            hg_image_free(img);
        }
        hg_image_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/hologlyph.h"))
            .unwrap();
    for sym in [
        "HG_STATUS_OK",
        "HG_STATUS_PANIC",
        "typedef struct HgImage HgImage",
        "typedef struct HgNetwork HgNetwork",
        "hg_embed(",
        "hg_reconstruct(",
        "hg_network_load(",
        "hg_restore_frame(",
        "hg_last_error_message(",
        "hg_psnr(",
        "hg_ssim(",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }
}
