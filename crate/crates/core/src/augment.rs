//! Baseline spectrogram conditioners: SpecAugment-style masking and time
//! warping, and Mixup.
//!
//! All randomness comes from a ChaCha8 stream seeded by the caller, and every
//! draw is returned so it can be recorded and replayed.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Deterministic generator used by every stochastic conditioner.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Width limit and count for masks along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaskSpec {
    /// Widths are drawn uniformly from `1..=max_width`.
    pub max_width: usize,
    pub num_masks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WarpSpec {
    /// Largest displacement of the warp anchor, in frames.
    pub max_shift: usize,
}

/// Value written into masked cells.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MaskFill {
    /// Mean of the whole (warped) spectrogram. Zero is a loud value in the
    /// log domain, so the mean is the default.
    #[default]
    Mean,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpecAugmentConfig {
    pub time_mask: Option<MaskSpec>,
    pub freq_mask: Option<MaskSpec>,
    pub time_warp: Option<WarpSpec>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub fill: MaskFill,
    pub seed: u64,
}

impl SpecAugmentConfig {
    /// Checks the config against a `frames × bands` spectrogram.
    pub fn validate(&self, frames: usize, bands: usize) -> Result<()> {
        if self.time_mask.is_none() && self.freq_mask.is_none() && self.time_warp.is_none() {
            return Err(Error::InvalidConfig("no axis enabled".into()));
        }
        let check = |spec: Option<MaskSpec>, dim: usize, axis: &str| -> Result<()> {
            if let Some(m) = spec {
                if m.max_width == 0 || m.max_width > dim {
                    return Err(Error::InvalidConfig(alloc::format!(
                        "{axis} mask width {} must lie in 1..={dim}",
                        m.max_width
                    )));
                }
                if m.num_masks == 0 {
                    return Err(Error::InvalidConfig(alloc::format!(
                        "{axis} mask count must be at least 1"
                    )));
                }
            }
            Ok(())
        };
        check(self.time_mask, frames, "time")?;
        check(self.freq_mask, bands, "frequency")?;
        if let Some(w) = self.time_warp {
            if w.max_shift == 0 || w.max_shift > frames {
                return Err(Error::InvalidConfig(alloc::format!(
                    "time warp shift {} must lie in 1..={frames}",
                    w.max_shift
                )));
            }
        }
        if let MaskFill::Value(v) = self.fill {
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "mask fill" });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Axis {
    Time,
    Frequency,
}

/// A mask that was applied: `width` rows (time) or columns (frequency)
/// starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaskDraw {
    pub axis: Axis,
    pub start: usize,
    pub width: usize,
}

/// Warp that moved frame `anchor` to `anchor + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WarpDraw {
    pub anchor: usize,
    pub shift: i64,
}

/// Everything drawn during one [`spec_augment`] call.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpecAugmentRecord {
    pub seed: u64,
    pub warp: Option<WarpDraw>,
    pub masks: Vec<MaskDraw>,
    pub fill_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecAugmentOutput {
    pub features: Matrix,
    pub record: SpecAugmentRecord,
}

/// Applies time warping, then frequency masks, then time masks.
pub fn spec_augment(spec: &Matrix, config: &SpecAugmentConfig) -> Result<SpecAugmentOutput> {
    spec.ensure_finite("spectrogram")?;
    let (frames, bands) = spec.shape();
    config.validate(frames, bands)?;
    let mut rng = rng_from_seed(config.seed);

    let (mut out, warp) = match config.time_warp {
        Some(w) => {
            let (warped, draw) = time_warp(spec, w.max_shift, &mut rng);
            (warped, draw)
        }
        None => (spec.clone(), None),
    };

    let fill_value = match config.fill {
        MaskFill::Mean => out.mean(),
        MaskFill::Value(v) => v,
    };

    let mut masks = Vec::new();
    for (axis, spec, dim) in [
        (Axis::Frequency, config.freq_mask, bands),
        (Axis::Time, config.time_mask, frames),
    ] {
        let Some(m) = spec else { continue };
        for _ in 0..m.num_masks {
            let width = rng.random_range(1..=m.max_width);
            let start = rng.random_range(0..=dim - width);
            masks.push(MaskDraw { axis, start, width });
        }
    }
    for m in &masks {
        fill_mask(&mut out, m, fill_value);
    }

    Ok(SpecAugmentOutput {
        features: out,
        record: SpecAugmentRecord {
            seed: config.seed,
            warp,
            masks,
            fill_value,
        },
    })
}

fn fill_mask(out: &mut Matrix, mask: &MaskDraw, value: f64) {
    let range = mask.start..mask.start + mask.width;
    match mask.axis {
        Axis::Time => {
            for t in range {
                out.row_mut(t).fill(value);
            }
        }
        Axis::Frequency => {
            for t in 0..out.rows() {
                out.row_mut(t)[range.clone()].fill(value);
            }
        }
    }
}

/// Piecewise-linear time warp. An interior anchor frame moves by up to
/// `max_shift` frames and both sides are stretched linearly to follow it.
/// Clips shorter than three frames are returned unchanged.
fn time_warp(spec: &Matrix, max_shift: usize, rng: &mut ChaCha8Rng) -> (Matrix, Option<WarpDraw>) {
    let frames = spec.rows();
    if frames < 3 {
        return (spec.clone(), None);
    }
    let anchor = rng.random_range(1..=frames - 2);
    let left = max_shift.min(anchor - 1) as i64;
    let right = max_shift.min(frames - 2 - anchor) as i64;
    let shift = rng.random_range(-left..=right);
    let draw = WarpDraw { anchor, shift };
    (warp_with(spec, draw), Some(draw))
}

/// Applies a recorded warp.
pub fn warp_with(spec: &Matrix, draw: WarpDraw) -> Matrix {
    let frames = spec.rows();
    if frames < 3 || draw.shift == 0 {
        return spec.clone();
    }
    let last = (frames - 1) as f64;
    let src_anchor = draw.anchor as f64;
    let dst_anchor = (draw.anchor as i64 + draw.shift) as f64;
    let mut out = Matrix::zeros(frames, spec.cols());
    for t in 0..frames {
        let tf = t as f64;
        let src = if tf <= dst_anchor {
            tf * src_anchor / dst_anchor
        } else {
            src_anchor + (tf - dst_anchor) * (last - src_anchor) / (last - dst_anchor)
        };
        let lo = libm::floor(src) as usize;
        let hi = (lo + 1).min(frames - 1);
        let frac = src - lo as f64;
        let (a, b) = (spec.row(lo), spec.row(hi));
        for (o, (x, y)) in out.row_mut(t).iter_mut().zip(a.iter().zip(b)) {
            *o = if frac == 0.0 { *x } else { x + frac * (y - x) };
        }
    }
    out
}

/// Mixup parameters: `λ ~ Beta(beta, beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixupConfig {
    pub beta: f64,
    pub seed: u64,
}

impl MixupConfig {
    pub const DEFAULT_BETA: f64 = 0.2;

    pub fn new(seed: u64) -> Self {
        Self {
            beta: Self::DEFAULT_BETA,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Draws a mixing weight from `Beta(beta, beta)`.
pub fn sample_lambda<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> Result<f64> {
    let dist = Beta::new(beta, beta)
        .map_err(|_| Error::InvalidConfig(alloc::format!("beta must be positive, got {beta}")))?;
    Ok(dist.sample(rng).clamp(0.0, 1.0))
}

/// One Mixup pairing: this clip mixed with `partner` at weight `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixupDraw {
    pub lambda: f64,
    pub partner: usize,
    pub seed: u64,
}

/// `(λ·A + (1-λ)·B, λ·y_A + (1-λ)·y_B)`.
pub fn mixup(
    spec_a: &Matrix,
    labels_a: &[f64],
    spec_b: &Matrix,
    labels_b: &[f64],
    lambda: f64,
) -> Result<(Matrix, Vec<f64>)> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidConfig(alloc::format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    if spec_a.shape() != spec_b.shape() {
        return Err(Error::ShapeMismatch {
            expected: spec_a.shape(),
            found: spec_b.shape(),
        });
    }
    if labels_a.len() != labels_b.len() {
        return Err(Error::LabelMismatch(labels_a.len(), labels_b.len()));
    }
    spec_a.ensure_finite("mixup operand")?;
    spec_b.ensure_finite("mixup operand")?;
    let mix = |a: f64, b: f64| lambda * a + (1.0 - lambda) * b;
    let data = spec_a
        .as_slice()
        .iter()
        .zip(spec_b.as_slice())
        .map(|(&a, &b)| mix(a, b))
        .collect();
    let labels = labels_a
        .iter()
        .zip(labels_b)
        .map(|(&a, &b)| mix(a, b))
        .collect();
    Ok((
        Matrix::from_vec(spec_a.rows(), spec_a.cols(), data)?,
        labels,
    ))
}
