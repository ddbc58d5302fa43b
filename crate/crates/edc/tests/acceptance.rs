//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::time::{Duration, Instant};

use common::{path_str, run, stderr, stdout, tree, write_corpus, write_wav};
use edc_core::augment::MaskSpec;
use edc_core::dataset::{build_training_set, ConditioningRecord};
use edc_core::edc::{
    apply_edc, attention_weights, build_range_mask, edc_with_mask, similarity_matrix,
};
use edc_core::{
    AttenuationConfig, ConditioningMethod, DatasetMode, LabeledClip, Matrix, MelSpectrogram,
    MixupConfig, SpecAugmentConfig, SpectrogramConfig,
};
use oracle::{reference_edc, relative_error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const ALPHAS: [f64; 4] = [0.5, 2.0, 7.0, 10.0];

fn random_rows(rng: &mut ChaCha8Rng, t: usize, f: usize) -> Vec<Vec<f64>> {
    let scale = [0.1, 1.0, 3.0][rng.random_range(0..3)];
    (0..t)
        .map(|_| (0..f).map(|_| rng.random_range(-scale..scale)).collect())
        .collect()
}

fn matrix(rows: &[Vec<f64>]) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

fn gaussian(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    sigma * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn timed(limit: Duration, elapsed: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:?}, limit {limit:?}"))
    }
}

fn reach_table() -> Outcome {
    let expected = [18, 38, 54, 78, 156, 390, 782, 1956, 3912];
    let start = Instant::now();
    let out = run(&[
        "ranges",
        "--alphas",
        "2.5,5,7,10,20,50,100,250,500",
        "--cutoff",
        "0.02",
    ]);
    let elapsed = start.elapsed();
    if out.status.code() != Some(0) {
        return Err(format!("exit {:?}: {}", out.status.code(), stderr(&out)));
    }
    let frames: Vec<usize> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| {
            l.split('\t')
                .nth(1)
                .and_then(|v| v.parse().ok())
                .unwrap_or(usize::MAX)
        })
        .collect();
    if frames != expected {
        return Err(format!("got {frames:?}"));
    }
    timed(Duration::from_secs(1), elapsed)?;
    Ok(format!("{frames:?} in {elapsed:.2?}"))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xED0C);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for case in 0..200 {
        let t = rng.random_range(1..=32);
        let f = rng.random_range(1..=8);
        let alpha = ALPHAS[rng.random_range(0..ALPHAS.len())];
        let x = random_rows(&mut rng, t, f);
        let config = AttenuationConfig::new(alpha).unwrap();
        let out = edc_with_mask(&matrix(&x), &config).map_err(|e| e.to_string())?;
        let reference = reference_edc(&x, alpha, config.cutoff, false);
        let ranges: Vec<(usize, usize)> =
            out.mask.ranges().iter().map(|r| (r.start, r.end)).collect();
        if ranges != reference.ranges {
            return Err(format!(
                "case {case}: windows differ (T={t}, F={f}, alpha={alpha})"
            ));
        }
        let err = relative_error(out.features.as_slice(), &reference.output.concat());
        worst = worst.max(err);
        if err > 1e-9 {
            return Err(format!("case {case}: relative error {err:e}"));
        }
    }
    let elapsed = start.elapsed();
    timed(Duration::from_secs(10), elapsed)?;
    Ok(format!(
        "200 cases, worst relative error {worst:.1e}, {elapsed:.2?}"
    ))
}

fn stochasticity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5707);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let t = rng.random_range(1..=48);
        let f = rng.random_range(1..=8);
        let alpha = ALPHAS[rng.random_range(0..ALPHAS.len())];
        let config = AttenuationConfig::new(alpha).unwrap();
        let omega = similarity_matrix(&matrix(&random_rows(&mut rng, t, f))).unwrap();
        let mask = build_range_mask(&omega, &config).unwrap();
        let w = attention_weights(&omega, &mask).unwrap();
        for i in 0..t {
            let r = mask.range(i);
            let sum: f64 = w.row(i).iter().sum();
            worst = worst.max((sum - 1.0).abs());
            if (sum - 1.0).abs() > 1e-6 {
                return Err(format!("case {case}: row {i} sums to {sum}"));
            }
            if let Some(j) = (0..t).find(|&j| !r.contains(j) && w[(i, j)] != 0.0) {
                return Err(format!(
                    "case {case}: weight ({i}, {j}) outside window is {}",
                    w[(i, j)]
                ));
            }
        }
    }
    Ok(format!("1000 cases, worst |row sum - 1| = {worst:.1e}"))
}

fn identity_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1D);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let t = rng.random_range(2..=64);
        let f = rng.random_range(1..=16);
        let alpha = ALPHAS[rng.random_range(0..ALPHAS.len())];
        let config = AttenuationConfig::new(alpha).unwrap();
        let x = random_rows(&mut rng, t, f);

        let single = matrix(&x[..1]);
        let constant = matrix(&vec![x[0].clone(); t]);
        let no_reach = AttenuationConfig::new(rng.random_range(0.01..0.25)).unwrap();
        if no_reach.max_reach() != 0 {
            return Err(format!(
                "case {case}: expected zero reach for alpha {}",
                no_reach.alpha
            ));
        }
        let full = matrix(&x);
        let checks = [
            ("T=1", apply_edc(&single, &config), &single),
            ("constant", apply_edc(&constant, &config), &constant),
            ("zero reach", apply_edc(&full, &no_reach), &full),
        ];
        for (what, out, input) in checks {
            let out = out.map_err(|e| e.to_string())?;
            let err = out
                .as_slice()
                .iter()
                .zip(input.as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(err);
            if err > 1e-6 {
                return Err(format!("case {case} ({what}): max deviation {err:e}"));
            }
        }
    }
    Ok(format!("100 shapes x 3 limits, max deviation {worst:.1e}"))
}

fn time_reversal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7E5);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let t = rng.random_range(1..=64);
        let f = rng.random_range(1..=8);
        let alpha = ALPHAS[rng.random_range(0..ALPHAS.len())];
        let config = AttenuationConfig::new(alpha).unwrap();
        let x = matrix(&random_rows(&mut rng, t, f));
        let a = apply_edc(&x.reverse_rows(), &config).unwrap();
        let b = apply_edc(&x, &config).unwrap().reverse_rows();
        let err = relative_error(a.as_slice(), b.as_slice());
        worst = worst.max(err);
        if err > 1e-9 {
            return Err(format!("case {case}: relative error {err:e}"));
        }
    }
    Ok(format!("100 cases, worst relative error {worst:.1e}"))
}

/// Two adjacent blocks with orthogonal spectral shapes in low-level noise.
/// Returns the rows and the index ranges of block A and block B.
fn two_blocks(
    seed: u64,
) -> (
    Vec<Vec<f64>>,
    std::ops::Range<usize>,
    std::ops::Range<usize>,
) {
    const T: usize = 500;
    const F: usize = 64;
    const LEN: usize = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<Vec<f64>> = (0..T)
        .map(|_| (0..F).map(|_| gaussian(&mut rng, 0.01)).collect())
        .collect();
    let a0 = (T - 2 * LEN) / 2;
    let (a, b) = (a0..a0 + LEN, a0 + LEN..a0 + 2 * LEN);
    for i in a.clone().chain(b.clone()) {
        let lit = if a.contains(&i) { 0..24 } else { 24..48 };
        for (k, v) in x[i].iter_mut().enumerate() {
            *v = if lit.contains(&k) {
                1.0
            } else if k >= 48 {
                gaussian(&mut rng, 0.05)
            } else {
                0.0
            };
        }
    }
    (x, a, b)
}

/// (contrast, mean within-block deviation) over block interiors.
fn boundary_stats(
    y: &[Vec<f64>],
    a: &std::ops::Range<usize>,
    b: &std::ops::Range<usize>,
) -> (f64, f64) {
    const MARGIN: usize = 3;
    let interior = |r: &std::ops::Range<usize>| (r.start + MARGIN)..(r.end - MARGIN);
    let mean = |r: std::ops::Range<usize>| {
        let n = r.len() as f64;
        let mut m = vec![0.0; y[0].len()];
        for i in r {
            for (acc, v) in m.iter_mut().zip(&y[i]) {
                *acc += v / n;
            }
        }
        m
    };
    let dist = |p: &[f64], q: &[f64]| {
        p.iter()
            .zip(q)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let deviation = |r: std::ops::Range<usize>| {
        let m = mean(r.clone());
        r.clone().map(|i| dist(&y[i], &m)).sum::<f64>() / r.len() as f64
    };
    let (ia, ib) = (interior(a), interior(b));
    let dev = (deviation(ia.clone()) + deviation(ib.clone())) / 2.0;
    (dist(&mean(ia), &mean(ib)) / dev, dev)
}

/// Softmax mass of each block-interior frame's similarity row that falls
/// within `reach` frames of it; the minimum over frames and directions.
fn local_mass(x: &[Vec<f64>], rows: impl Iterator<Item = usize>, reach: usize) -> f64 {
    let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
    let mut worst = f64::INFINITY;
    for i in rows {
        let sides = [
            (0..=i).collect::<Vec<_>>(),
            (i..x.len()).collect::<Vec<_>>(),
        ];
        for side in sides {
            let s: Vec<f64> = side.iter().map(|&j| dot(&x[i], &x[j])).collect();
            let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = s.iter().map(|v| (v - max).exp()).collect();
            let z: f64 = e.iter().sum();
            let near: f64 = side
                .iter()
                .zip(&e)
                .filter(|(&j, _)| j.abs_diff(i) <= reach)
                .map(|(_, v)| v)
                .sum();
            worst = worst.min(near / z);
        }
    }
    worst
}

fn boundary_preservation() -> Outcome {
    let alpha = 7.0;
    let config = AttenuationConfig::new(alpha).unwrap();
    let mut min_reduction = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    for seed in 0..6 {
        let (x, a, b) = two_blocks(seed);
        let mass = local_mass(&x, a.clone().chain(b.clone()), config.max_reach());
        if mass <= 0.99 {
            return Err(format!(
                "seed {seed}: precondition failed, local softmax mass {mass:.4}"
            ));
        }
        let out = apply_edc(&matrix(&x), &config).map_err(|e| e.to_string())?;
        let y: Vec<Vec<f64>> = out.iter_rows().map(<[f64]>::to_vec).collect();
        let reference = reference_edc(&x, alpha, config.cutoff, false);
        let err = relative_error(out.as_slice(), &reference.output.concat());
        if err > 1e-9 {
            return Err(format!(
                "seed {seed}: implementation and reference differ by {err:e}"
            ));
        }
        let (c0, d0) = boundary_stats(&x, &a, &b);
        for (who, rows) in [("implementation", &y), ("reference", &reference.output)] {
            let (c1, d1) = boundary_stats(rows, &a, &b);
            let reduction = 1.0 - d1 / d0;
            if c1 < c0 {
                return Err(format!(
                    "seed {seed} ({who}): contrast fell from {c0:.3} to {c1:.3}"
                ));
            }
            if reduction < 0.5 {
                return Err(format!(
                    "seed {seed} ({who}): deviation reduced by only {:.1}%",
                    100.0 * reduction
                ));
            }
            min_reduction = min_reduction.min(reduction);
            min_ratio = min_ratio.min(c1 / c0);
        }
    }
    Ok(format!(
        "alpha 7, 6 seeds: deviation reduced >= {:.1}%, contrast ratio >= {min_ratio:.2}",
        100.0 * min_reduction
    ))
}

fn feature_shapes() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut shapes = Vec::new();
    for (seconds, expected) in [(10.0, (500, 64)), (4.0, (200, 64))] {
        let wav = dir.path().join(format!("{seconds}.wav"));
        let edcf = dir.path().join(format!("{seconds}.edcf"));
        write_wav(&wav, seconds, 16_000, 7);
        let out = run(&[
            "extract",
            "--in",
            path_str(&wav),
            "--out",
            path_str(&edcf),
            "--window-ms",
            "40",
            "--hop-ms",
            "20",
            "--n-mels",
            "64",
        ]);
        if out.status.code() != Some(0) {
            return Err(format!("extract failed: {}", stderr(&out)));
        }
        let t = edc::tensor::read_features(&edcf).map_err(|e| e.to_string())?;
        let shape = (t.frames(), t.bands());
        if shape != expected {
            return Err(format!(
                "{seconds} s clip gave {shape:?}, expected {expected:?}"
            ));
        }
        shapes.push(format!("{seconds} s -> {}x{}", shape.0, shape.1));
    }
    Ok(shapes.join(", "))
}

fn pipeline_counts() -> Outcome {
    const N: usize = 100;
    const K: usize = 10;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0);
    let clips: Vec<LabeledClip> = (0..N)
        .map(|i| {
            let frames = matrix(&random_rows(&mut rng, 50, 16));
            let spec = MelSpectrogram {
                frames,
                frame_rate: 50.0,
                sample_rate: 16_000,
                config: SpectrogramConfig::default(),
            };
            let labels = (0..K)
                .map(|_| f64::from(rng.random_bool(0.3) as u8))
                .collect();
            LabeledClip::new(format!("c{i}"), spec, labels).unwrap()
        })
        .collect();
    let methods = [
        ConditioningMethod::None,
        ConditioningMethod::Edc(AttenuationConfig::new(7.0).unwrap()),
        ConditioningMethod::SpecAugment(SpecAugmentConfig {
            time_mask: Some(MaskSpec {
                max_width: 10,
                num_masks: 2,
            }),
            freq_mask: Some(MaskSpec {
                max_width: 4,
                num_masks: 2,
            }),
            time_warp: None,
            fill: Default::default(),
            seed: 3,
        }),
        ConditioningMethod::Mixup(MixupConfig::new(9)),
    ];
    let mut worst_label = 0.0f64;
    for method in &methods {
        for (mode, expected) in [(DatasetMode::Original, N), (DatasetMode::Augmented, 2 * N)] {
            let set = build_training_set(&clips, method, mode).map_err(|e| e.to_string())?;
            if set.len() != expected {
                return Err(format!(
                    "{}/{}: {} clips, expected {expected}",
                    method.tag(),
                    mode.as_str(),
                    set.len()
                ));
            }
            for ex in &set {
                let source = &clips[ex.source];
                match &ex.record {
                    ConditioningRecord::Mixup(draw) => {
                        let partner = &clips[draw.partner];
                        if draw.partner == ex.source {
                            return Err("mixup paired a clip with itself".into());
                        }
                        for k in 0..K {
                            let want = draw.lambda * source.labels[k]
                                + (1.0 - draw.lambda) * partner.labels[k];
                            let diff = (ex.clip.labels[k] - want).abs();
                            worst_label = worst_label.max(diff);
                            if diff > 1e-6 {
                                return Err(format!("mixup label off by {diff:e}"));
                            }
                        }
                    }
                    _ if ex.clip.labels != source.labels => {
                        return Err(format!("{}: labels changed", method.tag()));
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(format!(
        "OM={N}, AM={} for none/edc/specaug/mixup; mixup labels within {worst_label:.1e}",
        2 * N
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = write_corpus(&dir.path().join("data"), 6, 4, 1.5);
    let mut files = 0;
    for (method, extra) in [
        ("specaug", vec!["--seed", "42"]),
        ("mixup", vec!["--seed", "42", "--beta", "0.2"]),
        ("edc", vec!["--alpha", "7"]),
    ] {
        let mut trees = Vec::new();
        for (run_no, jobs) in ["1", "4"].iter().enumerate() {
            let out_dir = dir.path().join(format!("{method}-{run_no}"));
            let mut args = vec![
                "batch",
                "--manifest",
                path_str(&manifest),
                "--out-dir",
                path_str(&out_dir),
                "--method",
                method,
                "--mode",
                "am",
                "--jobs",
                jobs,
            ];
            args.extend(extra.iter().copied());
            let out = run(&args);
            if out.status.code() != Some(0) {
                return Err(format!("{method}: batch failed: {}", stderr(&out)));
            }
            trees.push(tree(&out_dir));
        }
        if trees[0] != trees[1] {
            return Err(format!("{method}: output trees differ between runs"));
        }
        files += trees[0].len();
    }
    Ok(format!(
        "3 methods x 2 runs (1 and 4 workers), {files} files byte-identical"
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("reach table", reach_table),
        ("oracle equivalence", oracle_equivalence),
        ("stochasticity invariants", stochasticity),
        ("identity suite", identity_suite),
        ("time-reversal equivariance", time_reversal),
        ("boundary preservation", boundary_preservation),
        ("feature extraction shapes", feature_shapes),
        ("pipeline counts", pipeline_counts),
        ("batch determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(detail)) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
