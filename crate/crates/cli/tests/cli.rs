//! End-to-end tests of the `seconv` binary: command output formats, exit
//! codes, and bit-exactness against the library paths.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use seconv_core::baseline::median_filter;
use seconv_core::image::Image;
use seconv_core::noise::counter_uniform;

fn seconv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seconv"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("seconv-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_test_pgm(path: &Path, seed: u64, side: usize) -> Image {
    let bytes: Vec<u8> = (0..side * side)
        .map(|i| (1.0 + counter_uniform(seed, i as u64) * 253.0) as u8)
        .collect();
    let img = Image::from_u8(side, side, 1, &bytes).unwrap();
    seconv_cli::io::write_image(path, &img).unwrap();
    img
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn add_noise_density_zero_is_identity() {
    let dir = workdir("noise0");
    let input = dir.join("in.pgm");
    write_test_pgm(&input, 1, 16);
    let output = dir.join("out.pgm");
    let out = seconv()
        .args(["add-noise", "--density", "0"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&output)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read(&input).unwrap(), fs::read(&output).unwrap());
    assert!(stdout_of(&out).starts_with("corrupted 0 of 256 pixels"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn add_noise_same_seed_identical_outputs() {
    let dir = workdir("noiseseed");
    let input = dir.join("in.pgm");
    write_test_pgm(&input, 2, 24);
    let (a, b) = (dir.join("a.pgm"), dir.join("b.pgm"));
    for out_path in [&a, &b] {
        let out = seconv()
            .args(["add-noise", "--density", "0.4", "--seed", "99"])
            .arg("--input")
            .arg(&input)
            .arg("--output")
            .arg(out_path)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn add_noise_reported_fraction_tracks_density() {
    let dir = workdir("noisefrac");
    let input = dir.join("in.pgm");
    write_test_pgm(&input, 3, 512);
    let out = seconv()
        .args(["add-noise", "--density", "0.5", "--seed", "5"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(dir.join("out.pgm"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout_of(&out);
    let fraction: f64 = text
        .split("fraction ")
        .nth(1)
        .and_then(|s| s.trim_end().trim_end_matches(')').parse().ok())
        .unwrap();
    assert!((fraction - 0.5).abs() < 0.01, "fraction {fraction}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn denoise_mf_matches_library_bit_exactly() {
    let dir = workdir("mf");
    let input = dir.join("in.pgm");
    let img = write_test_pgm(&input, 4, 20);
    let output = dir.join("out.pgm");
    let out = seconv()
        .args(["denoise", "--method", "mf", "--window", "3"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&output)
        .output()
        .unwrap();
    assert!(out.status.success());
    let got = seconv_cli::io::read_image(&output).unwrap();
    let want = median_filter(&img, 3).unwrap();
    assert_eq!(got.to_u8(), want.to_u8());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn denoise_cascade_on_clean_image_prints_stage_counts() {
    let dir = workdir("cascadeclean");
    let input = dir.join("in.pgm");
    write_test_pgm(&input, 5, 16);
    let out = seconv()
        .args(["denoise", "--method", "cascade"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(dir.join("out.pgm"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("block 3x3: restored 0"));
    assert!(text.contains("block 15x15: restored 0"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_method_exits_with_validation_code() {
    let dir = workdir("badmethod");
    let input = dir.join("in.pgm");
    write_test_pgm(&input, 6, 8);
    let out = seconv()
        .args(["denoise", "--method", "wavelet"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(dir.join("out.pgm"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown method"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_input_exits_with_io_code() {
    let dir = workdir("missing");
    let out = seconv()
        .args(["denoise", "--method", "mf"])
        .arg("--input")
        .arg(dir.join("nope.pgm"))
        .arg("--output")
        .arg(dir.join("out.pgm"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn eval_identical_files_golden_output() {
    let dir = workdir("evalgold");
    let input = dir.join("in.pgm");
    write_test_pgm(&input, 7, 12);
    let out = seconv()
        .arg("eval")
        .arg("--denoised")
        .arg(&input)
        .arg("--reference")
        .arg(&input)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "PSNR: inf\nSSIM: 1.000\nMSE: 0.0000\n");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn eval_shape_mismatch_fails() {
    let dir = workdir("evalshape");
    let a = dir.join("a.pgm");
    let b = dir.join("b.pgm");
    write_test_pgm(&a, 8, 12);
    write_test_pgm(&b, 9, 10);
    let out = seconv()
        .arg("eval")
        .arg("--denoised")
        .arg(&a)
        .arg("--reference")
        .arg(&b)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn eval_output_format_is_stable_across_runs() {
    let dir = workdir("evalstable");
    let a = dir.join("a.pgm");
    let b = dir.join("b.pgm");
    write_test_pgm(&a, 10, 16);
    write_test_pgm(&b, 11, 16);
    let run = || {
        let out = seconv()
            .arg("eval")
            .arg("--denoised")
            .arg(&a)
            .arg("--reference")
            .arg(&b)
            .output()
            .unwrap();
        assert!(out.status.success());
        stdout_of(&out)
    };
    let first = run();
    assert_eq!(first, run());
    assert!(first.starts_with("PSNR: "));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn bench_rejects_bad_density_with_validation_code() {
    let dir = workdir("benchbad");
    write_test_pgm(&dir.join("img.pgm"), 12, 8);
    let out = seconv()
        .arg("bench")
        .arg("--dataset-dir")
        .arg(&dir)
        .args(["--densities", "0", "--output-csv"])
        .arg(dir.join("out.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn network_method_requires_weights() {
    let dir = workdir("netweights");
    let input = dir.join("in.pgm");
    write_test_pgm(&input, 13, 8);
    let out = seconv()
        .args(["denoise", "--method", "network"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(dir.join("out.pgm"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--weights"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn network_denoise_via_weight_file() {
    let dir = workdir("netrun");
    let input = dir.join("in.pgm");
    write_test_pgm(&input, 14, 16);
    let weights = dir.join("w.scvw");
    let graph = seconv_core::network::NetworkGraph::standard(1, 10, 4).unwrap();
    seconv_cli::scvw::save_weights(&weights, &graph).unwrap();
    let output = dir.join("out.pgm");
    let out = seconv()
        .args(["denoise", "--method", "network"])
        .arg("--input")
        .arg(&input)
        .arg("--output")
        .arg(&output)
        .arg("--weights")
        .arg(&weights)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(output.exists());
    fs::remove_dir_all(&dir).ok();
}
