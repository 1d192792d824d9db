//! Shared helpers: fixture images, binary invocation and golden cases.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nfr_cli::Pgm;
use nfr_core::synthetic::{noisy_squares, squares};
use nfr_core::Image64;

pub const SIDE: usize = 32;
pub const NOISE_SEED: u64 = 7;

pub fn write_pgm(path: &Path, img: &Image64) {
    let (pgm, saturated) = Pgm::from_image(img, 255).unwrap();
    assert_eq!(saturated, 0, "fixture must fit 8 bits");
    pgm.write(path).unwrap();
}

/// Writes `clean.pgm`, `noisy.pgm` and `constant.pgm` into `dir`.
pub fn write_fixtures(dir: &Path) {
    write_pgm(&dir.join("clean.pgm"), &squares(SIDE));
    let noisy = noisy_squares::<f64>(SIDE, 10.0, NOISE_SEED)
        .map(|v| v.clamp(0.0, 255.0))
        .unwrap();
    write_pgm(&dir.join("noisy.pgm"), &noisy);
    write_pgm(&dir.join("constant.pgm"), &Image64::filled(vec![8, 8], 77.0).unwrap());
}

pub fn nfr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nfr"))
        .args(args)
        .current_dir(dir)
        .env_remove("NFR_THREADS")
        .output()
        .expect("binary runs")
}

pub fn nfr_ok(dir: &Path, args: &[&str]) -> Output {
    let out = nfr(dir, args);
    assert!(
        out.status.success(),
        "nfr {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// One command with its golden outputs.
pub struct GoldenCase {
    pub name: &'static str,
    pub args: &'static [&'static str],
}

pub fn golden_cases() -> Vec<GoldenCase> {
    vec![
        GoldenCase {
            name: "rearrange",
            args: &["rearrange", "-i", "noisy.pgm", "-o", "out"],
        },
        GoldenCase {
            name: "denoise_nf",
            args: &[
                "denoise",
                "-i",
                "noisy.pgm",
                "-o",
                "out.pgm",
                "--h",
                "20",
                "--csv",
                "out.csv",
            ],
        },
        GoldenCase {
            name: "denoise_nlm",
            args: &[
                "denoise",
                "-i",
                "noisy.pgm",
                "-o",
                "out.pgm",
                "--filter",
                "nlm",
                "--h",
                "30",
                "--window",
                "3",
            ],
        },
        GoldenCase {
            name: "segment",
            args: &["segment", "-i", "noisy.pgm", "-o", "out", "--h", "20"],
        },
        GoldenCase {
            name: "noise",
            args: &[
                "noise",
                "-i",
                "clean.pgm",
                "-o",
                "out.pgm",
                "--snr",
                "10",
                "--seed",
                "3",
                "--csv",
                "out.csv",
            ],
        },
        GoldenCase {
            name: "bench",
            args: &[
                "bench",
                "--sizes",
                "8,16",
                "--levels",
                "16",
                "--omit-timings",
                "-o",
                "out.csv",
            ],
        },
        GoldenCase {
            name: "compare",
            args: &[
                "compare",
                "--reference",
                "clean.pgm",
                "-i",
                "noisy.pgm",
                "clean.pgm",
                "-o",
                "out.csv",
            ],
        },
    ]
}

pub fn golden_dir(case: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(case)
}

/// Runs `case` in a fresh directory and returns every file it wrote,
/// sorted by name.
pub fn run_case(case: &GoldenCase) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures(dir.path());
    let before: Vec<_> = list(dir.path()).into_iter().map(|(n, _)| n).collect();
    nfr_ok(dir.path(), case.args);
    list(dir.path())
        .into_iter()
        .filter(|(n, _)| !before.contains(n))
        .collect()
}

fn list(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

pub fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

pub fn csv_column(path: &Path, column: &str) -> Vec<f64> {
    let (header, rows) = parse_csv(&fs::read_to_string(path).unwrap());
    let idx = header.iter().position(|h| h == column).expect("column exists");
    rows.iter().map(|r| r[idx].parse().unwrap()).collect()
}

pub fn report_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    serde_json::from_str(text.lines().last().expect("report line")).unwrap()
}
