//! Labeled clips and training-set construction.
//!
//! In original-size mode (OM) every clip is replaced by its conditioned
//! version, so the set keeps its size. In augmented mode (AM) the conditioned
//! versions are appended after the originals, doubling the set. With no
//! conditioning, AM simply repeats every clip.

use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use rand::Rng;

use crate::augment::{
    mixup, rng_from_seed, sample_lambda, spec_augment, MixupConfig, MixupDraw, SpecAugmentConfig,
    SpecAugmentRecord,
};
use crate::edc::{apply_edc, AttenuationConfig};
use crate::error::{Error, Result};
use crate::features::MelSpectrogram;
use crate::matrix::Matrix;

/// A spectrogram with its multi-hot (or, after Mixup, soft) label vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledClip {
    pub clip_id: String,
    pub features: MelSpectrogram,
    /// One entry per class, each in `[0, 1]`.
    pub labels: Vec<f64>,
}

impl LabeledClip {
    pub fn new(
        clip_id: impl Into<String>,
        features: MelSpectrogram,
        labels: Vec<f64>,
    ) -> Result<Self> {
        if labels.iter().any(|y| !(0.0..=1.0).contains(y)) {
            return Err(Error::InvalidConfig("labels must lie in [0, 1]".into()));
        }
        Ok(Self {
            clip_id: clip_id.into(),
            features,
            labels,
        })
    }
}

/// Which conditioner produces the derived clips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConditioningMethod {
    None,
    Edc(AttenuationConfig),
    SpecAugment(SpecAugmentConfig),
    Mixup(MixupConfig),
}

impl ConditioningMethod {
    /// Short name used in file names and metadata.
    pub fn tag(&self) -> &'static str {
        match self {
            ConditioningMethod::None => "none",
            ConditioningMethod::Edc(_) => "edc",
            ConditioningMethod::SpecAugment(_) => "specaug",
            ConditioningMethod::Mixup(_) => "mixup",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetMode {
    /// Conditioned clips replace the originals.
    Original,
    /// Conditioned clips are added to the originals.
    Augmented,
}

impl DatasetMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetMode::Original => "om",
            DatasetMode::Augmented => "am",
        }
    }
}

impl FromStr for DatasetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "om" | "original" => Ok(DatasetMode::Original),
            "am" | "augmented" => Ok(DatasetMode::Augmented),
            other => Err(Error::InvalidConfig(alloc::format!(
                "unknown dataset mode `{other}` (expected om or am)"
            ))),
        }
    }
}

/// Pads by repeating the last frame, or truncates, to exactly `target` frames.
pub fn pad_frames(frames: &Matrix, target: usize) -> Result<Matrix> {
    if target == 0 {
        return Err(Error::InvalidConfig(
            "target frame count must be at least 1".into(),
        ));
    }
    if frames.rows() == 0 {
        return Err(Error::Empty("spectrogram"));
    }
    let cols = frames.cols();
    let keep = frames.rows().min(target);
    let mut data = Vec::with_capacity(target * cols);
    data.extend_from_slice(&frames.as_slice()[..keep * cols]);
    let last = frames.row(keep - 1);
    for _ in keep..target {
        data.extend_from_slice(last);
    }
    Matrix::from_vec(target, cols, data)
}

pub fn pad_to_frames(spec: &MelSpectrogram, target: usize) -> Result<MelSpectrogram> {
    Ok(spec.with_frames(pad_frames(&spec.frames, target)?))
}

/// What was done to produce a training example.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditioningRecord {
    /// Original (or duplicated) clip.
    None,
    Edc(AttenuationConfig),
    SpecAugment(SpecAugmentRecord),
    Mixup(MixupDraw),
}

impl ConditioningRecord {
    pub fn tag(&self) -> &'static str {
        match self {
            ConditioningRecord::None => "none",
            ConditioningRecord::Edc(_) => "edc",
            ConditioningRecord::SpecAugment(_) => "specaug",
            ConditioningRecord::Mixup(_) => "mixup",
        }
    }
}

/// One element of a built training set.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub clip: LabeledClip,
    /// Index of the input clip this example derives from.
    pub source: usize,
    /// `false` for the original half of an augmented-mode set.
    pub derived: bool,
    pub record: ConditioningRecord,
}

/// Builds an OM or AM training set. See the module docs for the layout:
/// derived examples keep the input order, and in AM they follow all originals.
pub fn build_training_set(
    clips: &[LabeledClip],
    method: &ConditioningMethod,
    mode: DatasetMode,
) -> Result<Vec<TrainingExample>> {
    let plans = plan_conditioning(clips.len(), method)?;
    let derived = plans
        .iter()
        .enumerate()
        .map(|(source, plan)| condition_clip(clips, source, plan))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(clips, derived, mode))
}

/// Per-clip conditioning step with all random draws already made.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClipPlan {
    Copy,
    Edc(AttenuationConfig),
    /// Carries the clip's own seed.
    SpecAugment(SpecAugmentConfig),
    Mixup(MixupDraw),
}

/// Draws everything random up front so the clips can then be conditioned
/// independently, in any order or in parallel.
///
/// SpecAugment seeds come from a ChaCha8 stream seeded with the configured
/// seed. For Mixup the same kind of stream first yields a derangement of
/// partners and then one `λ` per clip.
pub fn plan_conditioning(clips: usize, method: &ConditioningMethod) -> Result<Vec<ClipPlan>> {
    if clips == 0 {
        return Err(Error::Empty("clip list"));
    }
    match method {
        ConditioningMethod::None => Ok(alloc::vec![ClipPlan::Copy; clips]),
        ConditioningMethod::Edc(config) => {
            config.validate()?;
            Ok(alloc::vec![ClipPlan::Edc(*config); clips])
        }
        ConditioningMethod::SpecAugment(config) => {
            let mut seeds = rng_from_seed(config.seed);
            Ok((0..clips)
                .map(|_| {
                    ClipPlan::SpecAugment(SpecAugmentConfig {
                        seed: seeds.random(),
                        ..*config
                    })
                })
                .collect())
        }
        ConditioningMethod::Mixup(config) => {
            config.validate()?;
            if clips < 2 {
                return Err(Error::NotEnoughClips(clips));
            }
            let mut rng = rng_from_seed(config.seed);
            let partners = derangement(clips, &mut rng);
            partners
                .into_iter()
                .map(|partner| {
                    Ok(ClipPlan::Mixup(MixupDraw {
                        lambda: sample_lambda(config.beta, &mut rng)?,
                        partner,
                        seed: config.seed,
                    }))
                })
                .collect()
        }
    }
}

/// Produces the derived example for `clips[source]`.
pub fn condition_clip(
    clips: &[LabeledClip],
    source: usize,
    plan: &ClipPlan,
) -> Result<TrainingExample> {
    let input = clips.get(source).ok_or(Error::IndexOutOfRange {
        index: source,
        frames: clips.len(),
    })?;
    let derive = |frames: Matrix, labels: Vec<f64>, record| TrainingExample {
        clip: LabeledClip {
            clip_id: input.clip_id.clone(),
            features: input.features.with_frames(frames),
            labels,
        },
        source,
        derived: true,
        record,
    };
    Ok(match plan {
        ClipPlan::Copy => TrainingExample {
            clip: input.clone(),
            source,
            derived: true,
            record: ConditioningRecord::None,
        },
        ClipPlan::Edc(config) => derive(
            apply_edc(&input.features.frames, config)?,
            input.labels.clone(),
            ConditioningRecord::Edc(*config),
        ),
        ClipPlan::SpecAugment(config) => {
            let out = spec_augment(&input.features.frames, config)?;
            derive(
                out.features,
                input.labels.clone(),
                ConditioningRecord::SpecAugment(out.record),
            )
        }
        ClipPlan::Mixup(draw) => {
            let partner = clips.get(draw.partner).ok_or(Error::IndexOutOfRange {
                index: draw.partner,
                frames: clips.len(),
            })?;
            let (frames, labels) = mixup(
                &input.features.frames,
                &input.labels,
                &partner.features.frames,
                &partner.labels,
                draw.lambda,
            )?;
            derive(frames, labels, ConditioningRecord::Mixup(*draw))
        }
    })
}

/// Lays out the final set: `derived` alone in OM, originals then `derived` in AM.
pub fn assemble(
    clips: &[LabeledClip],
    derived: Vec<TrainingExample>,
    mode: DatasetMode,
) -> Vec<TrainingExample> {
    match mode {
        DatasetMode::Original => derived,
        DatasetMode::Augmented => clips
            .iter()
            .enumerate()
            .map(|(source, clip)| TrainingExample {
                clip: clip.clone(),
                source,
                derived: false,
                record: ConditioningRecord::None,
            })
            .chain(derived)
            .collect(),
    }
}

/// Random permutation with no fixed points (Sattolo's single-cycle shuffle).
pub fn derangement<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..i);
        perm.swap(i, j);
    }
    perm
}
