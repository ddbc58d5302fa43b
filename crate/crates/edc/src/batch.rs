//! Manifest-driven batch processing.
//!
//! Clips are decoded and turned into log-mel spectrograms on a worker pool,
//! padded to a common length, conditioned and written as
//! `<out_dir>/<clip_id>.<tag>.edcf` next to a `summary.json`. A clip that
//! fails to load is recorded in the summary and skipped; the rest of the
//! batch goes on.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use edc_core::dataset::{assemble, condition_clip, pad_to_frames, plan_conditioning, ClipPlan};
use edc_core::features::LogMelExtractor;
use edc_core::{ConditioningMethod, DatasetMode, LabeledClip, MelSpectrogram, SpectrogramConfig};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::audio::load_wav;
use crate::error::{Error, Result};
use crate::manifest::{resolve_clip_path, Manifest};
use crate::meta::{self, method_params, record_params};
use crate::tensor::{write_features, FeatureMeta, FeatureTensor};

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub spectrogram: SpectrogramConfig,
    pub method: ConditioningMethod,
    pub mode: DatasetMode,
    /// Common frame count. Defaults to the largest nominal length
    /// (`duration / hop`) among the loaded clips.
    pub target_frames: Option<usize>,
    /// Worker threads; `None` uses one per core.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub clip_id: String,
    pub source: String,
    pub derived: bool,
    pub frames: usize,
    pub bands: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    /// Data line of the manifest, counting the header as line 1.
    pub line: usize,
    pub path: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub manifest_clips: usize,
    pub loaded: usize,
    pub failed: usize,
    pub written: usize,
    pub mode: &'static str,
    pub method: &'static str,
    pub method_params: Value,
    pub spectrogram: SpectrogramConfig,
    pub target_frames: Option<usize>,
    pub class_names: Vec<String>,
    pub outputs: Vec<OutputRecord>,
    pub failures: Vec<Failure>,
}

struct Loaded {
    entry: usize,
    spec: MelSpectrogram,
    nominal: usize,
}

/// Runs the whole batch. Only an empty manifest, an invalid configuration
/// or a failure to write into `out_dir` is an error; unreadable clips end
/// up in [`BatchSummary::failures`].
pub fn process_manifest(
    manifest: &Manifest,
    manifest_dir: &Path,
    options: &BatchOptions,
    out_dir: &Path,
) -> Result<BatchSummary> {
    if manifest.entries.is_empty() {
        return Err(Error::EmptyManifest);
    }
    if options.target_frames == Some(0) {
        return Err(Error::Usage("target frames must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Usage(format!("worker pool: {e}")))?;
    pool.install(|| run(manifest, manifest_dir, options, out_dir))
}

fn run(
    manifest: &Manifest,
    manifest_dir: &Path,
    options: &BatchOptions,
    out_dir: &Path,
) -> Result<BatchSummary> {
    let ids = clip_ids(manifest);
    let extractors = ExtractorCache::new(options.spectrogram);

    let results: Vec<Result<Loaded>> = manifest
        .entries
        .par_iter()
        .enumerate()
        .map(|(entry, e)| {
            let clip = load_wav(resolve_clip_path(manifest_dir, e))?;
            let spec = extractors.get(clip.sample_rate())?.extract(&clip)?;
            let nominal = options.spectrogram.nominal_frames(clip.duration());
            Ok(Loaded {
                entry,
                spec,
                nominal,
            })
        })
        .collect();

    let mut loaded = Vec::new();
    let mut failures = Vec::new();
    for (entry, result) in results.into_iter().enumerate() {
        match result {
            Ok(l) => loaded.push(l),
            // An invalid spectrogram config fails every clip alike.
            Err(Error::Core(e @ edc_core::Error::InvalidConfig(_))) => return Err(e.into()),
            Err(e) => failures.push(Failure {
                line: entry + 2,
                path: manifest.entries[entry].clip_path.clone(),
                error: e.to_string(),
            }),
        }
    }

    let mut summary = BatchSummary {
        manifest_clips: manifest.entries.len(),
        loaded: loaded.len(),
        failed: failures.len(),
        written: 0,
        mode: options.mode.as_str(),
        method: options.method.tag(),
        method_params: method_params(&options.method),
        spectrogram: options.spectrogram,
        target_frames: None,
        class_names: manifest.class_names.clone(),
        outputs: Vec::new(),
        failures,
    };
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    if loaded.is_empty() {
        write_summary(&summary, out_dir)?;
        return Ok(summary);
    }

    let target = options
        .target_frames
        .unwrap_or_else(|| loaded.iter().map(|l| l.nominal).max().unwrap_or(1).max(1));
    summary.target_frames = Some(target);
    let clips = loaded
        .iter()
        .map(|l| {
            let entry = &manifest.entries[l.entry];
            LabeledClip::new(
                ids[l.entry].clone(),
                pad_to_frames(&l.spec, target)?,
                entry.label_values(),
            )
            .map_err(Error::from)
        })
        .collect::<Result<Vec<_>>>()?;

    let plans = plan_conditioning(clips.len(), &options.method)?;
    let derived = plans
        .par_iter()
        .enumerate()
        .map(|(source, plan)| condition_clip(&clips, source, plan).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    let examples = assemble(&clips, derived, options.mode);

    let copy_tag = match options.mode {
        DatasetMode::Augmented => "copy",
        DatasetMode::Original => "none",
    };
    let outputs = examples
        .par_iter()
        .map(|ex| {
            let tag = match (ex.derived, &options.method) {
                (false, _) => "none",
                (true, ConditioningMethod::None) => copy_tag,
                (true, m) => m.tag(),
            };
            let l = &loaded[ex.source];
            let mut params =
                meta::extraction_params(&l.spec, l.spec.num_frames(), Some(&ex.clip.labels));
            params["frames"]["stored"] = json!(target);
            if ex.derived && !matches!(options.method, ConditioningMethod::None) {
                let partner = match plans[ex.source] {
                    ClipPlan::Mixup(d) => Some(clips[d.partner].clip_id.as_str()),
                    _ => None,
                };
                meta::push_conditioning(&mut params, record_params(&ex.record, partner));
            }
            let tensor = FeatureTensor::from_matrix(
                &ex.clip.features.frames,
                FeatureMeta {
                    clip_id: ex.clip.clip_id.clone(),
                    method: tag.into(),
                    params,
                },
            )?;
            let file = format!("{}.{}.edcf", ex.clip.clip_id, tag);
            write_features(&tensor, out_dir.join(&file))?;
            Ok(OutputRecord {
                file,
                clip_id: ex.clip.clip_id.clone(),
                source: manifest.entries[l.entry].clip_path.clone(),
                derived: ex.derived,
                frames: tensor.frames(),
                bands: tensor.bands(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    summary.written = outputs.len();
    summary.outputs = outputs;
    write_summary(&summary, out_dir)?;
    Ok(summary)
}

fn write_summary(summary: &BatchSummary, out_dir: &Path) -> Result<()> {
    let path = out_dir.join(SUMMARY_FILE);
    let mut text = serde_json::to_string_pretty(summary).expect("summary is plain JSON");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// File stems, made unique in manifest order by appending `-2`, `-3`, ...
fn clip_ids(manifest: &Manifest) -> Vec<String> {
    let stems: Vec<String> = manifest
        .entries
        .iter()
        .map(|e| {
            let path = PathBuf::from(&e.clip_path);
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| "clip".into())
        })
        .collect();
    let mut taken: HashSet<String> = HashSet::new();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    stems
        .iter()
        .map(|stem| {
            let n = counts.entry(stem).or_insert(0);
            loop {
                *n += 1;
                let id = if *n == 1 {
                    stem.clone()
                } else {
                    format!("{stem}-{n}")
                };
                if taken.insert(id.clone()) {
                    return id;
                }
            }
        })
        .collect()
}

/// One extractor per sample rate, shared by all workers.
struct ExtractorCache {
    config: SpectrogramConfig,
    by_rate: RwLock<HashMap<u32, Arc<LogMelExtractor>>>,
}

impl ExtractorCache {
    fn new(config: SpectrogramConfig) -> Self {
        Self {
            config,
            by_rate: RwLock::new(HashMap::new()),
        }
    }

    fn get(&self, sample_rate: u32) -> Result<Arc<LogMelExtractor>> {
        if let Some(ex) = self.by_rate.read().expect("cache lock").get(&sample_rate) {
            return Ok(Arc::clone(ex));
        }
        let built = Arc::new(LogMelExtractor::new(self.config, sample_rate)?);
        let mut map = self.by_rate.write().expect("cache lock");
        Ok(Arc::clone(map.entry(sample_rate).or_insert(built)))
    }
}
