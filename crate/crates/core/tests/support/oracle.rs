//! Straight-line reference implementation of the conditioning transform,
//! written index-by-index with 1-based frames and the textbook masked
//! softmax. Independent of the library's kernels.

#![allow(dead_code, clippy::needless_range_loop)]

pub struct Reference {
    pub output: Vec<Vec<f64>>,
    /// Inclusive 0-based window per frame.
    pub ranges: Vec<(usize, usize)>,
    /// Masked softmax weights, `T × T`.
    pub weights: Vec<Vec<f64>>,
    pub offsets: Vec<(f64, f64)>,
}

fn softmax(v: &[f64]) -> Vec<f64> {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v
        .iter()
        .map(|&x| {
            if x == f64::NEG_INFINITY {
                0.0
            } else {
                (x - max).exp()
            }
        })
        .collect();
    let z: f64 = e.iter().sum();
    e.iter().map(|x| x / z).collect()
}

pub fn reference_edc(x: &[Vec<f64>], alpha: f64, cutoff: f64, floor: bool) -> Reference {
    let t = x.len();
    let f = x[0].len();
    // Ω = X Xᵀ, 1-based.
    let mut omega = vec![vec![0.0; t + 1]; t + 1];
    for i in 1..=t {
        for j in 1..=t {
            let mut s = 0.0;
            for k in 0..f {
                s += x[i - 1][k] * x[j - 1][k];
            }
            omega[i][j] = s;
        }
    }
    let round = |v: f64| if floor { v.floor() } else { v.round() };
    let mut phi = vec![vec![f64::NEG_INFINITY; t + 1]; t + 1];
    let mut ranges = Vec::new();
    let mut offsets = Vec::new();
    for i in 1..=t {
        // forward: [λ_i1 .. λ_ii], offsets [i-1 .. 0]
        let fw: Vec<f64> = (1..=i).map(|n| omega[i][n]).collect();
        let p = softmax(&fw);
        let mut f_offset = 0.0;
        for n in 1..=i {
            let o = (i - n) as f64;
            let d = (-o / alpha).exp();
            if d >= cutoff {
                f_offset += o * p[n - 1] * d;
            }
        }
        // backward: [λ_ii .. λ_iT], offsets [0 .. T-i]
        let bw: Vec<f64> = (i..=t).map(|n| omega[i][n]).collect();
        let p = softmax(&bw);
        let mut b_offset = 0.0;
        for n in i..=t {
            let o = (n - i) as f64;
            let d = (-o / alpha).exp();
            if d >= cutoff {
                b_offset += o * p[n - i] * d;
            }
        }
        offsets.push((f_offset, b_offset));
        let rf = (round(f_offset) as usize).min(i - 1);
        let rb = (round(b_offset) as usize).min(t - i);
        for j in (i - rf)..=(i + rb) {
            phi[i][j] = 0.0;
        }
        ranges.push((i - rf - 1, i + rb - 1));
    }
    let mut weights = Vec::new();
    let mut output = Vec::new();
    for i in 1..=t {
        let masked: Vec<f64> = (1..=t).map(|j| omega[i][j] + phi[i][j]).collect();
        let w = softmax(&masked);
        let mut row = vec![0.0; f];
        for j in 0..t {
            for k in 0..f {
                row[k] += w[j] * x[j][k];
            }
        }
        weights.push(w);
        output.push(row);
    }
    Reference {
        output,
        ranges,
        weights,
        offsets,
    }
}

/// Naive triple-loop Gram matrix.
pub fn naive_gram(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let t = x.len();
    let mut g = vec![vec![0.0; t]; t];
    for i in 0..t {
        for j in 0..t {
            for k in 0..x[0].len() {
                g[i][j] += x[i][k] * x[j][k];
            }
        }
    }
    g
}

/// `‖a - b‖∞ / max(‖b‖∞, tiny)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let scale = b
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    diff / scale
}
