#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hound::{SampleFormat, WavSpec, WavWriter};

pub fn edc() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_edc"));
    cmd.env_remove("EDC_SEED");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    edc().args(args).output().expect("spawn edc")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// 16-bit mono WAV: a chirp from 200 Hz to 4 kHz plus a little deterministic noise.
pub fn write_wav(path: &Path, seconds: f64, sample_rate: u32, seed: u32) {
    let spec = WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut w = WavWriter::create(path, spec).unwrap();
    let n = (seconds * f64::from(sample_rate)).round() as usize;
    let mut state = 0x9E37_79B9u32 ^ seed;
    for k in 0..n {
        let t = k as f64 / f64::from(sample_rate);
        let f = 200.0 + (3800.0 * t / seconds.max(1e-9));
        state ^= state << 13;
        state ^= state >> 17;
        state ^= state << 5;
        let noise = (f64::from(state) / f64::from(u32::MAX) - 0.5) * 0.05;
        let v = 0.5 * (2.0 * PI * f * t + f64::from(seed)).sin() + noise;
        w.write_sample((v * 32767.0) as i16).unwrap();
    }
    w.finalize().unwrap();
}

/// Writes `n` clips and a manifest with `k` classes; returns the manifest path.
pub fn write_corpus(dir: &Path, n: usize, k: usize, seconds: f64) -> PathBuf {
    std::fs::create_dir_all(dir.join("audio")).unwrap();
    let mut csv = String::from("path");
    for c in 0..k {
        csv.push_str(&format!(",class_{c}"));
    }
    csv.push('\n');
    for i in 0..n {
        let rel = format!("audio/clip{i:02}.wav");
        write_wav(&dir.join(&rel), seconds, 16_000, i as u32);
        csv.push_str(&rel);
        for c in 0..k {
            csv.push_str(if (i + c) % 3 == 0 { ",1" } else { ",0" });
        }
        csv.push('\n');
    }
    let manifest = dir.join("manifest.csv");
    std::fs::write(&manifest, csv).unwrap();
    manifest
}

/// Every file under `root` with its bytes, sorted by relative path.
pub fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}
