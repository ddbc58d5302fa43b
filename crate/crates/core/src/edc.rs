//! Event-related data conditioning.
//!
//! Given a spectrogram `X` (frames × bands), conditioning proceeds as:
//!
//! 1. The cross-frame similarity matrix `Ω = X Xᵀ` (raw dot products).
//! 2. For frame `i`, row `ω_i` is split into a forward part (frames `..=i`)
//!    and a backward part (frames `i..`). Both contain `λ_ii`.
//! 3. Each part goes through a softmax. The expected distance from frame `i`
//!    under that distribution, weighted by the attenuation `D(Δ) = e^{-Δ/α}`,
//!    gives the forward and backward offsets. Distances whose attenuation
//!    falls below `cutoff` are ignored, which bounds each side of the window
//!    by `floor(α · ln(1/cutoff))` frames.
//! 4. The offsets are rounded to whole frames and clamped to the clip. They
//!    define a contiguous window `[i - r_f, i + r_b]`.
//! 5. Each output frame is the softmax of `ω_i` restricted to its window,
//!    applied to the frames of `X`. Entries outside the window get weight 0.
//!
//! The attenuation uses `α` as a time constant, so a larger `α` widens the
//! reachable window. With the default cutoff of 0.02 the total window is
//! `2 · floor(α · ln 50)` frames: 54 frames for `α = 7` and 78 for `α = 10`.
//!
//! Frame indices in this module are 0-based.
//!
//! All sums that feed a frame's output run outward from the frame itself,
//! pairing the two frames at equal distance. This makes the transform
//! exactly equivariant under time reversal.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Default attenuation level below which a distance is unreachable.
pub const DEFAULT_CUTOFF: f64 = 0.02;

/// Conversion of a real-valued expected offset to a whole number of frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Rounding {
    /// Round half away from zero.
    #[default]
    Nearest,
    /// Round toward zero.
    Floor,
}

impl Rounding {
    fn apply(self, value: f64) -> f64 {
        match self {
            Rounding::Nearest => libm::round(value),
            Rounding::Floor => libm::floor(value),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rounding::Nearest => "nearest",
            Rounding::Floor => "floor",
        }
    }
}

impl core::str::FromStr for Rounding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Rounding::Nearest),
            "floor" => Ok(Rounding::Floor),
            other => Err(Error::InvalidConfig(alloc::format!(
                "unknown rounding mode `{other}` (expected nearest or floor)"
            ))),
        }
    }
}

/// Attenuation settings controlling how far a frame's window may reach.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AttenuationConfig {
    /// Time constant of the attenuation, in frames. Must be positive.
    pub alpha: f64,
    /// Attenuation below which a distance contributes nothing, in `(0, 1)`.
    pub cutoff: f64,
    /// How expected offsets become frame counts.
    pub rounding: Rounding,
}

impl AttenuationConfig {
    /// Config with the default cutoff and rounding.
    pub fn new(alpha: f64) -> Result<Self> {
        let config = Self {
            alpha,
            cutoff: DEFAULT_CUTOFF,
            rounding: Rounding::Nearest,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Result<Self> {
        self.cutoff = cutoff;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rounding(mut self, rounding: Rounding) -> Self {
        self.rounding = rounding;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.cutoff > 0.0 && self.cutoff < 1.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "cutoff must lie in (0, 1), got {}",
                self.cutoff
            )));
        }
        Ok(())
    }

    /// Largest distance, in frames, that one side of a window can reach:
    /// `floor(alpha · ln(1/cutoff))`.
    pub fn max_reach(&self) -> usize {
        // `as` saturates, so an enormous alpha just means "unbounded".
        libm::floor(self.alpha * libm::log(1.0 / self.cutoff)) as usize
    }

    /// Attenuation weight for a distance of `delta` frames; zero beyond
    /// [`max_reach`](Self::max_reach).
    pub fn attenuation(&self, delta: usize) -> f64 {
        if delta > self.max_reach() {
            0.0
        } else {
            libm::exp(-(delta as f64) / self.alpha)
        }
    }
}

/// Which side of the current frame a similarity vector covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Frames at or before the current one: `[λ_i0, ..., λ_ii]`.
    Forward,
    /// Frames at or after the current one: `[λ_ii, ..., λ_i(T-1)]`.
    Backward,
}

/// Cross-frame similarity matrix `Ω = X Xᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    omega: Matrix,
}

impl SimilarityMatrix {
    pub fn frames(&self) -> usize {
        self.omega.rows()
    }

    /// Similarity vector `ω_i` of frame `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        self.omega.row(i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.omega[(i, j)]
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.omega
    }

    pub fn into_matrix(self) -> Matrix {
        self.omega
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram matrix of the spectrogram's frames.
///
/// Only the upper triangle is computed; the lower one is mirrored from it, so
/// the result is exactly symmetric.
pub fn similarity_matrix(spec: &Matrix) -> Result<SimilarityMatrix> {
    spec.ensure_finite("spectrogram")?;
    let frames = spec.rows();
    let mut omega = Matrix::zeros(frames, frames);
    for i in 0..frames {
        let xi = spec.row(i);
        for j in i..frames {
            let value = dot(xi, spec.row(j));
            omega[(i, j)] = value;
            omega[(j, i)] = value;
        }
    }
    Ok(SimilarityMatrix { omega })
}

/// Splits `ω_i` into its forward (`..=i`) and backward (`i..`) parts.
pub fn split_similarity(omega_row: &[f64], i: usize) -> Result<(&[f64], &[f64])> {
    if i >= omega_row.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            frames: omega_row.len(),
        });
    }
    Ok((&omega_row[..=i], &omega_row[i..]))
}

/// Distance-ordered accessor: element `d` is the similarity `d` frames away
/// from the current frame.
struct ByDistance<'a> {
    values: &'a [f64],
    direction: Direction,
}

impl ByDistance<'_> {
    fn len(&self) -> usize {
        self.values.len()
    }

    fn at(&self, delta: usize) -> f64 {
        match self.direction {
            Direction::Forward => self.values[self.values.len() - 1 - delta],
            Direction::Backward => self.values[delta],
        }
    }
}

/// Attenuated expectation of the offset under the softmax of `sim_vec`.
///
/// `sim_vec` is a forward or backward similarity vector as returned by
/// [`split_similarity`]. The softmax covers the whole vector; only the
/// attenuation is truncated at the reach horizon.
pub fn expected_offset(
    sim_vec: &[f64],
    direction: Direction,
    config: &AttenuationConfig,
) -> Result<f64> {
    config.validate()?;
    if sim_vec.is_empty() {
        return Err(Error::Empty("similarity vector"));
    }
    if !sim_vec.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            what: "similarity vector",
        });
    }
    Ok(offset_unchecked(
        ByDistance {
            values: sim_vec,
            direction,
        },
        config,
    ))
}

fn offset_unchecked(sims: ByDistance<'_>, config: &AttenuationConfig) -> f64 {
    let n = sims.len();
    let max = (0..n).map(|d| sims.at(d)).fold(f64::NEG_INFINITY, f64::max);
    let normalizer: f64 = (0..n).map(|d| libm::exp(sims.at(d) - max)).sum();
    let reach = config.max_reach().min(n - 1);
    (1..=reach)
        .map(|d| {
            let p = libm::exp(sims.at(d) - max) / normalizer;
            d as f64 * p * libm::exp(-(d as f64) / config.alpha)
        })
        .sum()
}

/// Real-valued forward and backward offsets of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetPair {
    pub forward: f64,
    pub backward: f64,
}

/// Offsets of frame `i` computed from the similarity matrix.
pub fn frame_offsets(
    omega: &SimilarityMatrix,
    i: usize,
    config: &AttenuationConfig,
) -> Result<OffsetPair> {
    config.validate()?;
    let (forward, backward) = split_similarity(omega.row(i), i)?;
    Ok(OffsetPair {
        forward: offset_unchecked(
            ByDistance {
                values: forward,
                direction: Direction::Forward,
            },
            config,
        ),
        backward: offset_unchecked(
            ByDistance {
                values: backward,
                direction: Direction::Backward,
            },
            config,
        ),
    })
}

/// Inclusive window of frames `start..=end` attended to by one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameRange {
    pub start: usize,
    pub end: usize,
}

impl FrameRange {
    pub fn contains(&self, j: usize) -> bool {
        self.start <= j && j <= self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Whether a similarity entry survives the range mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskEntry {
    /// Inside the frame's window; the similarity passes through.
    Pass,
    /// Outside the window; acts as `-∞` before the softmax.
    Blocked,
}

/// Per-frame effective windows, the `Φ` mask of the transform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectiveRangeMask {
    ranges: Vec<FrameRange>,
}

impl EffectiveRangeMask {
    pub fn frames(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[FrameRange] {
        &self.ranges
    }

    pub fn range(&self, i: usize) -> FrameRange {
        self.ranges[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> MaskEntry {
        if self.ranges[i].contains(j) {
            MaskEntry::Pass
        } else {
            MaskEntry::Blocked
        }
    }

    /// Additive form of the mask: `0` inside a window, `-∞` outside.
    pub fn to_additive(&self) -> Matrix {
        let t = self.frames();
        let mut phi = Matrix::filled(t, t, f64::NEG_INFINITY);
        for (i, r) in self.ranges.iter().enumerate() {
            for j in r.start..=r.end {
                phi[(i, j)] = 0.0;
            }
        }
        phi
    }
}

/// Computes every frame's window from the similarity matrix.
pub fn build_range_mask(
    omega: &SimilarityMatrix,
    config: &AttenuationConfig,
) -> Result<EffectiveRangeMask> {
    config.validate()?;
    let frames = omega.frames();
    let reach = config.max_reach();
    let ranges = (0..frames)
        .map(|i| {
            let offsets = frame_offsets(omega, i, config)?;
            let to_frames = |offset: f64, limit: usize| -> usize {
                let r = config.rounding.apply(offset).max(0.0) as usize;
                r.min(limit).min(reach)
            };
            let back = to_frames(offsets.forward, i);
            let ahead = to_frames(offsets.backward, frames - 1 - i);
            Ok(FrameRange {
                start: i - back,
                end: i + ahead,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EffectiveRangeMask { ranges })
}

/// Softmax of `ω_i` over `range`, returned as weights for `range.start..=range.end`.
fn window_weights(omega_row: &[f64], i: usize, range: FrameRange) -> Vec<f64> {
    let window = &omega_row[range.start..=range.end];
    let max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = window.iter().map(|&v| libm::exp(v - max)).collect();
    let center = i - range.start;
    let normalizer = sum_outward(center, weights.len(), |k| weights[k]);
    for w in &mut weights {
        *w /= normalizer;
    }
    weights
}

/// Sums `value(k)` for `k in 0..len`, starting at `center` and adding the two
/// entries at each distance as a pair.
fn sum_outward(center: usize, len: usize, value: impl Fn(usize) -> f64) -> f64 {
    let mut acc = value(center);
    let reach = center.max(len - 1 - center);
    for d in 1..=reach {
        let left = if d <= center { value(center - d) } else { 0.0 };
        let right = if center + d < len {
            value(center + d)
        } else {
            0.0
        };
        acc += left + right;
    }
    acc
}

/// Row-stochastic attention matrix `softmax(Ω masked by Φ)`.
///
/// Blocked entries are exactly zero.
pub fn attention_weights(omega: &SimilarityMatrix, mask: &EffectiveRangeMask) -> Result<Matrix> {
    let frames = omega.frames();
    if mask.frames() != frames {
        return Err(Error::ShapeMismatch {
            expected: (frames, frames),
            found: (mask.frames(), mask.frames()),
        });
    }
    let mut out = Matrix::zeros(frames, frames);
    for (i, &range) in mask.ranges().iter().enumerate() {
        let weights = window_weights(omega.row(i), i, range);
        out.row_mut(i)[range.start..=range.end].copy_from_slice(&weights);
    }
    Ok(out)
}

/// Conditioned spectrogram together with the windows that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EdcOutput {
    pub features: Matrix,
    pub mask: EffectiveRangeMask,
}

/// Applies event-related data conditioning to a `frames × bands` spectrogram.
///
/// The output has the input's shape. Every output frame is a convex
/// combination of the input frames inside its window.
pub fn apply_edc(spec: &Matrix, config: &AttenuationConfig) -> Result<Matrix> {
    edc_with_mask(spec, config).map(|out| out.features)
}

/// Like [`apply_edc`], also returning the effective range mask.
pub fn edc_with_mask(spec: &Matrix, config: &AttenuationConfig) -> Result<EdcOutput> {
    config.validate()?;
    let omega = similarity_matrix(spec)?;
    let mask = build_range_mask(&omega, config)?;
    let bands = spec.cols();
    let mut features = Matrix::zeros(spec.rows(), bands);
    for (i, &range) in mask.ranges().iter().enumerate() {
        let weights = window_weights(omega.row(i), i, range);
        let center = i - range.start;
        let out = features.row_mut(i);
        for (f, slot) in out.iter_mut().enumerate() {
            *slot = sum_outward(center, weights.len(), |k| {
                weights[k] * spec[(range.start + k, f)]
            });
        }
    }
    Ok(EdcOutput { features, mask })
}

/// One row of the reach table: total selectable window for an `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachRow {
    pub alpha: f64,
    /// `2 · max_reach(alpha)`, both directions combined.
    pub frames: usize,
}

/// Total selectable window, in frames, for each `alpha` at the given cutoff.
pub fn max_reach_table(alphas: &[f64], cutoff: f64) -> Result<Vec<ReachRow>> {
    alphas
        .iter()
        .map(|&alpha| {
            let config = AttenuationConfig::new(alpha)?.with_cutoff(cutoff)?;
            Ok(ReachRow {
                alpha,
                frames: 2 * config.max_reach(),
            })
        })
        .collect()
}
