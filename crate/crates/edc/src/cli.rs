//! The `edc` command line.
//!
//! Exit codes: 0 on success, 2 for bad arguments or configuration, 3 for
//! I/O failures and 4 for malformed input data.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use edc_core::augment::{
    mixup, rng_from_seed, sample_lambda, spec_augment, MaskFill, MaskSpec, MixupConfig, WarpSpec,
};
use edc_core::dataset::{pad_to_frames, ConditioningRecord};
use edc_core::edc::{apply_edc, max_reach_table, DEFAULT_CUTOFF};
use edc_core::features::LogMelExtractor;
use edc_core::{
    AttenuationConfig, ConditioningMethod, DatasetMode, Rounding, SpecAugmentConfig,
    SpectrogramConfig,
};
use serde::Deserialize;

use crate::audio::load_wav;
use crate::batch::{process_manifest, BatchOptions};
use crate::error::{Error, Result};
use crate::manifest::read_manifest;
use crate::meta;
use crate::plot::{side_by_side, write_image};
use crate::tensor::{read_features, write_features, FeatureMeta, FeatureTensor};

/// SpecAugment policy used when no mask or warp flag is given.
pub const DEFAULT_TIME_MASK: MaskSpec = MaskSpec {
    max_width: 40,
    num_masks: 2,
};
pub const DEFAULT_FREQ_MASK: MaskSpec = MaskSpec {
    max_width: 8,
    num_masks: 2,
};
pub const DEFAULT_TIME_WARP: WarpSpec = WarpSpec { max_shift: 10 };

#[derive(Debug, Parser)]
#[command(
    name = "edc",
    version,
    about = "Log-mel features and data conditioning for audio event classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decode a WAV file and write its log-mel spectrogram.
    Extract(ExtractArgs),
    /// Apply EDC, SpecAugment or Mixup to a feature file.
    Condition(ConditionArgs),
    /// Extract and condition every clip of a manifest.
    Batch(BatchArgs),
    /// Print the total window length reachable for each alpha.
    Ranges(RangesArgs),
    /// Render feature files as a grayscale heatmap (PGM, or PNG by extension).
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrogramOpts {
    /// Analysis window length [default: 40]
    #[arg(long)]
    pub window_ms: Option<f64>,
    /// Hop between frames [default: 20]
    #[arg(long)]
    pub hop_ms: Option<f64>,
    /// Number of mel bands [default: 64]
    #[arg(long)]
    pub n_mels: Option<usize>,
    /// Lowest filterbank frequency in Hz [default: 0]
    #[arg(long)]
    pub fmin: Option<f64>,
    /// Highest filterbank frequency in Hz [default: Nyquist]
    #[arg(long)]
    pub fmax: Option<f64>,
    /// Smallest mel energy before the logarithm [default: 1e-10]
    #[arg(long)]
    pub log_floor: Option<f64>,
}

impl SpectrogramOpts {
    fn or(self, fallback: SpectrogramOpts) -> SpectrogramOpts {
        SpectrogramOpts {
            window_ms: self.window_ms.or(fallback.window_ms),
            hop_ms: self.hop_ms.or(fallback.hop_ms),
            n_mels: self.n_mels.or(fallback.n_mels),
            fmin: self.fmin.or(fallback.fmin),
            fmax: self.fmax.or(fallback.fmax),
            log_floor: self.log_floor.or(fallback.log_floor),
        }
    }

    pub fn resolve(&self) -> SpectrogramConfig {
        let d = SpectrogramConfig::default();
        SpectrogramConfig {
            window_ms: self.window_ms.unwrap_or(d.window_ms),
            hop_ms: self.hop_ms.unwrap_or(d.hop_ms),
            n_mels: self.n_mels.unwrap_or(d.n_mels),
            fmin: self.fmin.unwrap_or(d.fmin),
            fmax: self.fmax.or(d.fmax),
            log_floor: self.log_floor.unwrap_or(d.log_floor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    None,
    Edc,
    Specaug,
    Mixup,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Om,
    Am,
}

impl From<ModeName> for DatasetMode {
    fn from(mode: ModeName) -> Self {
        match mode {
            ModeName::Om => DatasetMode::Original,
            ModeName::Am => DatasetMode::Augmented,
        }
    }
}

/// `mean` or a number.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "serde_json::Value")]
pub struct FillArg(pub MaskFill);

impl std::str::FromStr for FillArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "mean" {
            return Ok(FillArg(MaskFill::Mean));
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(FillArg(MaskFill::Value(v))),
            _ => Err(format!("expected `mean` or a finite number, got `{s}`")),
        }
    }
}

impl TryFrom<serde_json::Value> for FillArg {
    type Error = String;

    fn try_from(value: serde_json::Value) -> std::result::Result<Self, String> {
        match value {
            serde_json::Value::String(s) => s.parse(),
            serde_json::Value::Number(n) => n.to_string().parse(),
            other => Err(format!("expected `mean` or a number, got {other}")),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodOpts {
    /// EDC attenuation time constant, in frames
    #[arg(long)]
    pub alpha: Option<f64>,
    /// EDC attenuation cutoff [default: 0.02]
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// EDC offset rounding: nearest or floor [default: nearest]
    #[arg(long)]
    pub rounding: Option<Rounding>,
    /// SpecAugment: widest time mask, in frames
    #[arg(long)]
    pub time_mask_width: Option<usize>,
    /// SpecAugment: number of time masks
    #[arg(long)]
    pub time_masks: Option<usize>,
    /// SpecAugment: widest frequency mask, in bands
    #[arg(long)]
    pub freq_mask_width: Option<usize>,
    /// SpecAugment: number of frequency masks
    #[arg(long)]
    pub freq_masks: Option<usize>,
    /// SpecAugment: largest time-warp shift, in frames
    #[arg(long)]
    pub time_warp: Option<usize>,
    /// SpecAugment mask fill: `mean` or a value [default: mean]
    #[arg(long)]
    pub fill: Option<FillArg>,
    /// Mixup: Beta(beta, beta) parameter for lambda
    #[arg(long)]
    pub beta: Option<f64>,
    /// Seed for SpecAugment and Mixup draws
    #[arg(long, env = "EDC_SEED")]
    pub seed: Option<u64>,
}

impl MethodOpts {
    fn or(self, fallback: MethodOpts) -> MethodOpts {
        MethodOpts {
            alpha: self.alpha.or(fallback.alpha),
            cutoff: self.cutoff.or(fallback.cutoff),
            rounding: self.rounding.or(fallback.rounding),
            time_mask_width: self.time_mask_width.or(fallback.time_mask_width),
            time_masks: self.time_masks.or(fallback.time_masks),
            freq_mask_width: self.freq_mask_width.or(fallback.freq_mask_width),
            freq_masks: self.freq_masks.or(fallback.freq_masks),
            time_warp: self.time_warp.or(fallback.time_warp),
            fill: self.fill.or(fallback.fill),
            beta: self.beta.or(fallback.beta),
            seed: self.seed.or(fallback.seed),
        }
    }

    /// Flags that belong to one method only, with the method they need.
    fn specific(&self) -> [(&'static str, bool, MethodName); 10] {
        use MethodName::*;
        [
            ("--alpha", self.alpha.is_some(), Edc),
            ("--cutoff", self.cutoff.is_some(), Edc),
            ("--rounding", self.rounding.is_some(), Edc),
            ("--time-mask-width", self.time_mask_width.is_some(), Specaug),
            ("--time-masks", self.time_masks.is_some(), Specaug),
            ("--freq-mask-width", self.freq_mask_width.is_some(), Specaug),
            ("--freq-masks", self.freq_masks.is_some(), Specaug),
            ("--time-warp", self.time_warp.is_some(), Specaug),
            ("--fill", self.fill.is_some(), Specaug),
            ("--beta", self.beta.is_some(), Mixup),
        ]
    }

    fn check_exclusive(&self, method: MethodName) -> Result<()> {
        for (flag, set, owner) in self.specific() {
            if set && owner != method {
                return Err(Error::Usage(format!(
                    "{flag} applies to --method {}, not {}",
                    name(owner),
                    name(method)
                )));
            }
        }
        Ok(())
    }

    fn attenuation(&self) -> Result<AttenuationConfig> {
        let alpha = self
            .alpha
            .ok_or_else(|| Error::Usage("--method edc needs --alpha".into()))?;
        let config = AttenuationConfig {
            alpha,
            cutoff: self.cutoff.unwrap_or(DEFAULT_CUTOFF),
            rounding: self.rounding.unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }

    fn spec_augment(&self) -> SpecAugmentConfig {
        let axis = |width: Option<usize>, count: Option<usize>, default: MaskSpec| {
            (width.is_some() || count.is_some()).then(|| MaskSpec {
                max_width: width.unwrap_or(default.max_width),
                num_masks: count.unwrap_or(default.num_masks),
            })
        };
        let mut time_mask = axis(self.time_mask_width, self.time_masks, DEFAULT_TIME_MASK);
        let mut freq_mask = axis(self.freq_mask_width, self.freq_masks, DEFAULT_FREQ_MASK);
        let mut time_warp = self.time_warp.map(|max_shift| WarpSpec { max_shift });
        if time_mask.is_none() && freq_mask.is_none() && time_warp.is_none() {
            time_mask = Some(DEFAULT_TIME_MASK);
            freq_mask = Some(DEFAULT_FREQ_MASK);
            time_warp = Some(DEFAULT_TIME_WARP);
        }
        SpecAugmentConfig {
            time_mask,
            freq_mask,
            time_warp,
            fill: self.fill.map(|f| f.0).unwrap_or_default(),
            seed: self.seed.unwrap_or(0),
        }
    }

    fn mixup(&self) -> Result<MixupConfig> {
        let config = MixupConfig {
            beta: self.beta.unwrap_or(MixupConfig::DEFAULT_BETA),
            seed: self.seed.unwrap_or(0),
        };
        config.validate()?;
        Ok(config)
    }

    /// The batch conditioning method, with unrelated flags rejected.
    pub fn resolve(&self, method: MethodName) -> Result<ConditioningMethod> {
        self.check_exclusive(method)?;
        Ok(match method {
            MethodName::None => ConditioningMethod::None,
            MethodName::Edc => ConditioningMethod::Edc(self.attenuation()?),
            MethodName::Specaug => ConditioningMethod::SpecAugment(self.spec_augment()),
            MethodName::Mixup => ConditioningMethod::Mixup(self.mixup()?),
        })
    }
}

fn name(method: MethodName) -> &'static str {
    match method {
        MethodName::None => "none",
        MethodName::Edc => "edc",
        MethodName::Specaug => "specaug",
        MethodName::Mixup => "mixup",
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Input WAV file
    #[arg(long = "in", value_name = "WAV")]
    pub input: PathBuf,
    /// Output feature file
    #[arg(long, value_name = "EDCF")]
    pub out: PathBuf,
    #[command(flatten)]
    pub spectrogram: SpectrogramOpts,
    /// Pad or truncate to this many frames [default: duration / hop]
    #[arg(long, conflicts_with = "no_pad")]
    pub frames: Option<usize>,
    /// Keep the frames the STFT produced
    #[arg(long)]
    pub no_pad: bool,
}

#[derive(Debug, Args)]
pub struct ConditionArgs {
    /// Input feature file
    #[arg(long = "in", value_name = "EDCF")]
    pub input: PathBuf,
    /// Output feature file
    #[arg(long, value_name = "EDCF")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub method: ConditionMethod,
    #[command(flatten)]
    pub options: MethodOpts,
    /// Mixup partner feature file
    #[arg(long, value_name = "EDCF")]
    pub partner: Option<PathBuf>,
    /// Mixup weight of the input, in [0, 1]
    #[arg(long, conflicts_with = "beta")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditionMethod {
    Edc,
    Specaug,
    Mixup,
}

impl From<ConditionMethod> for MethodName {
    fn from(m: ConditionMethod) -> Self {
        match m {
            ConditionMethod::Edc => MethodName::Edc,
            ConditionMethod::Specaug => MethodName::Specaug,
            ConditionMethod::Mixup => MethodName::Mixup,
        }
    }
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    /// CSV manifest; clip paths are relative to its directory
    #[arg(long, value_name = "CSV")]
    pub manifest: PathBuf,
    /// Directory for feature files and summary.json
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    /// JSON run configuration; flags given on the command line win
    #[arg(long, value_name = "JSON")]
    pub config: Option<PathBuf>,
    /// Conditioning method [default: none]
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// om replaces each clip, am adds the conditioned clips [default: om]
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    #[command(flatten)]
    pub spectrogram: SpectrogramOpts,
    #[command(flatten)]
    pub options: MethodOpts,
    /// Common frame count [default: longest clip's duration / hop]
    #[arg(long)]
    pub frames: Option<usize>,
    /// Worker threads [default: one per core]
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Contents of a `batch --config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Option<MethodName>,
    pub mode: Option<ModeName>,
    pub frames: Option<usize>,
    pub jobs: Option<usize>,
    pub spectrogram: SpectrogramOpts,
    pub conditioning: MethodOpts,
}

impl RunConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Args)]
pub struct RangesArgs {
    /// Comma-separated alpha values
    #[arg(long, value_delimiter = ',', required = true, num_args = 1.., allow_negative_numbers = true)]
    pub alphas: Vec<f64>,
    /// Attenuation cutoff
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: f64,
    /// Clip length; adds a column clamped to it
    #[arg(long)]
    pub frames: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Feature file to draw
    #[arg(long = "in", value_name = "EDCF")]
    pub input: PathBuf,
    /// Second feature file, drawn to the right
    #[arg(long, value_name = "EDCF")]
    pub compare: Option<PathBuf>,
    /// Output image; `.png` writes PNG, anything else binary PGM
    #[arg(long, value_name = "IMAGE")]
    pub out: PathBuf,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "edc: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Extract(args) => extract(args).map(|()| 0),
        Command::Condition(args) => condition(args).map(|()| 0),
        Command::Batch(args) => batch(args, stdout, stderr),
        Command::Ranges(args) => ranges(args, stdout).map(|()| 0),
        Command::Plot(args) => plot(args).map(|()| 0),
    }
}

fn clip_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "clip".into())
}

fn extract(args: ExtractArgs) -> Result<()> {
    let config = args.spectrogram.resolve();
    let clip = load_wav(&args.input)?;
    let extractor = LogMelExtractor::new(config, clip.sample_rate())?;
    let spec = extractor.extract(&clip)?;
    let extracted = spec.num_frames();
    let target = match (args.no_pad, args.frames) {
        (true, _) => None,
        (false, Some(0)) => return Err(Error::Usage("--frames must be at least 1".into())),
        (false, Some(n)) => Some(n),
        (false, None) => Some(config.nominal_frames(clip.duration()).max(1)),
    };
    let spec = match target {
        Some(t) => pad_to_frames(&spec, t)?,
        None => spec,
    };
    let tensor = FeatureTensor::from_matrix(
        &spec.frames,
        FeatureMeta {
            clip_id: clip_id(&args.input),
            method: "none".into(),
            params: meta::extraction_params(&spec, extracted, None),
        },
    )?;
    write_features(&tensor, &args.out)
}

fn condition(args: ConditionArgs) -> Result<()> {
    let method = MethodName::from(args.method);
    args.options.check_exclusive(method)?;
    if method != MethodName::Mixup && (args.partner.is_some() || args.lambda.is_some()) {
        return Err(Error::Usage(
            "--partner and --lambda apply to --method mixup only".into(),
        ));
    }
    let input = read_features(&args.input)?;
    let x = input.to_matrix();
    let mut params = input.meta.params.clone();

    let (features, record, tag) = match method {
        MethodName::Edc => {
            let config = args.options.attenuation()?;
            let record = ConditioningRecord::Edc(config);
            (
                apply_edc(&x, &config)?,
                meta::record_params(&record, None),
                "edc",
            )
        }
        MethodName::Specaug => {
            let out = spec_augment(&x, &args.options.spec_augment())?;
            let record = ConditioningRecord::SpecAugment(out.record);
            (out.features, meta::record_params(&record, None), "specaug")
        }
        MethodName::Mixup => {
            let (features, record) = condition_mixup(&args, &x, &input.meta.params, &mut params)?;
            (features, record, "mixup")
        }
        MethodName::None => unreachable!("not a condition method"),
    };
    meta::push_conditioning(&mut params, record);
    let tensor = FeatureTensor::from_matrix(
        &features,
        FeatureMeta {
            clip_id: input.meta.clip_id.clone(),
            method: tag.into(),
            params,
        },
    )?;
    write_features(&tensor, &args.out)
}

/// Mixes the input with `--partner`. Labels are mixed too when both files
/// carry them; otherwise the output has none.
fn condition_mixup(
    args: &ConditionArgs,
    x: &edc_core::Matrix,
    input_params: &serde_json::Value,
    params: &mut serde_json::Value,
) -> Result<(edc_core::Matrix, serde_json::Value)> {
    let partner_path = args
        .partner
        .as_ref()
        .ok_or_else(|| Error::Usage("--method mixup needs --partner".into()))?;
    let mut record = serde_json::json!({ "method": "mixup" });
    let lambda = match (args.lambda, args.options.beta, args.options.seed) {
        (Some(lambda), _, _) => lambda,
        (None, Some(beta), Some(seed)) => {
            record["beta"] = serde_json::json!(beta);
            record["seed"] = serde_json::json!(seed);
            sample_lambda(beta, &mut rng_from_seed(seed))?
        }
        _ => {
            return Err(Error::Usage(
                "--method mixup needs --lambda, or --beta with --seed".into(),
            ))
        }
    };
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Usage(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    let partner = read_features(partner_path)?;
    let labels = meta::labels(input_params).zip(meta::labels(&partner.meta.params));
    let (ya, yb) = labels.clone().unwrap_or_default();
    let (features, mixed) = mixup(x, &ya, &partner.to_matrix(), &yb, lambda)?;
    match (labels, params.as_object_mut()) {
        (Some(_), Some(map)) => {
            map.insert("labels".into(), serde_json::json!(mixed));
        }
        (None, Some(map)) => {
            map.remove("labels");
        }
        _ => {}
    }
    record["lambda"] = serde_json::json!(lambda);
    record["partner"] = serde_json::json!(partner.meta.clip_id);
    Ok((features, record))
}

fn batch(args: BatchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let file = match &args.config {
        Some(path) => RunConfig::read(path)?,
        None => RunConfig::default(),
    };
    let method_name = args.method.or(file.method).unwrap_or(MethodName::None);
    let options = BatchOptions {
        spectrogram: args.spectrogram.or(file.spectrogram).resolve(),
        method: args.options.or(file.conditioning).resolve(method_name)?,
        mode: args.mode.or(file.mode).unwrap_or(ModeName::Om).into(),
        target_frames: args.frames.or(file.frames),
        jobs: args.jobs.or(file.jobs),
    };
    let manifest = read_manifest(&args.manifest)?;
    let manifest_dir = args
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let summary = process_manifest(&manifest, &manifest_dir, &options, &args.out_dir)?;
    for failure in &summary.failures {
        let _ = writeln!(
            stderr,
            "edc: skipped line {}: {}",
            failure.line, failure.error
        );
    }
    let _ = writeln!(
        stdout,
        "{} feature files from {} of {} clips in {}",
        summary.written,
        summary.loaded,
        summary.manifest_clips,
        args.out_dir.display()
    );
    Ok(if summary.failures.is_empty() { 0 } else { 4 })
}

fn ranges(args: RangesArgs, stdout: &mut dyn Write) -> Result<()> {
    if args.frames == Some(0) {
        return Err(Error::Usage("--frames must be at least 1".into()));
    }
    let table = max_reach_table(&args.alphas, args.cutoff)?;
    let io = |e| Error::io(Path::new("<stdout>"), e);
    let mut notes = Vec::new();
    match args.frames {
        None => writeln!(stdout, "alpha\tframes").map_err(io)?,
        Some(_) => writeln!(stdout, "alpha\tframes\tclamped").map_err(io)?,
    }
    for row in &table {
        match args.frames {
            None => writeln!(stdout, "{}\t{}", row.alpha, row.frames).map_err(io)?,
            Some(t) => {
                writeln!(
                    stdout,
                    "{}\t{}\t{}",
                    row.alpha,
                    row.frames,
                    row.frames.min(t)
                )
                .map_err(io)?;
                if row.frames > t {
                    notes.push(format!(
                        "# alpha {}: horizon of {} frames exceeds the {t}-frame clip; \
                         attenuation no longer limits the window and EDC works on global context",
                        row.alpha, row.frames
                    ));
                }
            }
        }
    }
    for note in notes {
        writeln!(stdout, "{note}").map_err(io)?;
    }
    Ok(())
}

fn plot(args: PlotArgs) -> Result<()> {
    let mut tensors = vec![read_features(&args.input)?];
    if let Some(other) = &args.compare {
        tensors.push(read_features(other)?);
    }
    write_image(&side_by_side(&tensors), &args.out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn method_flags_are_exclusive() {
        let opts = MethodOpts {
            alpha: Some(7.0),
            ..Default::default()
        };
        assert!(opts.resolve(MethodName::Edc).is_ok());
        let err = opts.resolve(MethodName::Specaug).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("--alpha"));
    }

    #[test]
    fn specaug_defaults_only_without_axis_flags() {
        let all = MethodOpts::default().spec_augment();
        assert_eq!(all.time_mask, Some(DEFAULT_TIME_MASK));
        assert_eq!(all.freq_mask, Some(DEFAULT_FREQ_MASK));
        assert_eq!(all.time_warp, Some(DEFAULT_TIME_WARP));
        let only_freq = MethodOpts {
            freq_masks: Some(1),
            ..Default::default()
        }
        .spec_augment();
        assert_eq!(only_freq.time_mask, None);
        assert_eq!(only_freq.time_warp, None);
        assert_eq!(only_freq.freq_mask.unwrap().num_masks, 1);
    }

    #[test]
    fn run_config_parses_and_rejects_unknown_keys() {
        let config: RunConfig = serde_json::from_str(
            r#"{"method": "specaug", "mode": "am",
                "spectrogram": {"n_mels": 40},
                "conditioning": {"time_masks": 1, "fill": "mean", "seed": 3}}"#,
        )
        .unwrap();
        assert_eq!(config.method, Some(MethodName::Specaug));
        assert_eq!(config.spectrogram.resolve().n_mels, 40);
        assert_eq!(config.conditioning.fill, Some(FillArg(MaskFill::Mean)));
        assert!(serde_json::from_str::<RunConfig>(r#"{"methd": "edc"}"#).is_err());
        let fill: FillArg = serde_json::from_str("-3.5").unwrap();
        assert_eq!(fill, FillArg(MaskFill::Value(-3.5)));
    }

    #[test]
    fn flags_override_config_file() {
        let cli = MethodOpts {
            alpha: Some(2.0),
            ..Default::default()
        };
        let file = MethodOpts {
            alpha: Some(7.0),
            cutoff: Some(0.5),
            ..Default::default()
        };
        let merged = cli.or(file);
        assert_eq!((merged.alpha, merged.cutoff), (Some(2.0), Some(0.5)));
    }
}
