//! Log mel-bank energies.
//!
//! Frames are Hamming-windowed (symmetric window), zero-padded to the next
//! power of two and transformed; the half-spectrum power is projected onto
//! HTK-scale triangular filters and the natural log is taken with a floor.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fft::Radix2Fft;
use crate::matrix::Matrix;

/// Mono audio with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f32>,
    sample_rate: u32,
}

impl AudioClip {
    /// Fails on an empty buffer, a zero sample rate or non-finite samples.
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("audio clip"));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if !samples.iter().all(|s| s.is_finite()) {
            return Err(Error::NonFinite { what: "audio clip" });
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Duration in seconds.
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// STFT and mel parameters. Durations are in milliseconds, frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrogramConfig {
    pub window_ms: f64,
    pub hop_ms: f64,
    pub n_mels: usize,
    pub fmin: f64,
    /// Upper filterbank edge; `None` means the Nyquist frequency.
    pub fmax: Option<f64>,
    /// Smallest mel energy fed to the logarithm.
    pub log_floor: f64,
}

impl Default for SpectrogramConfig {
    /// 40 ms Hamming windows with 50% overlap and 64 mel bands.
    fn default() -> Self {
        Self {
            window_ms: 40.0,
            hop_ms: 20.0,
            n_mels: 64,
            fmin: 0.0,
            fmax: None,
            log_floor: 1e-10,
        }
    }
}

impl SpectrogramConfig {
    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let invalid = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if sample_rate == 0 {
            return invalid("sample rate must be positive".into());
        }
        if !(self.window_ms.is_finite() && self.window_ms > 0.0) {
            return invalid(alloc::format!(
                "window_ms must be positive, got {}",
                self.window_ms
            ));
        }
        if !(self.hop_ms > 0.0 && self.hop_ms <= self.window_ms) {
            return invalid(alloc::format!(
                "hop_ms must lie in (0, window_ms], got {}",
                self.hop_ms
            ));
        }
        if self.n_mels == 0 {
            return invalid("n_mels must be at least 1".into());
        }
        if !(self.log_floor.is_finite() && self.log_floor > 0.0) {
            return invalid(alloc::format!(
                "log_floor must be positive, got {}",
                self.log_floor
            ));
        }
        let nyquist = sample_rate as f64 / 2.0;
        let fmax = self.fmax(sample_rate);
        if !(self.fmin >= 0.0 && self.fmin < fmax && fmax <= nyquist) {
            return invalid(alloc::format!(
                "need 0 <= fmin < fmax <= {nyquist}, got fmin={} fmax={fmax}",
                self.fmin
            ));
        }
        if self.window_samples(sample_rate) == 0 || self.hop_samples(sample_rate) == 0 {
            return invalid("window or hop shorter than one sample".into());
        }
        Ok(())
    }

    pub fn fmax(&self, sample_rate: u32) -> f64 {
        self.fmax.unwrap_or(sample_rate as f64 / 2.0)
    }

    pub fn window_samples(&self, sample_rate: u32) -> usize {
        libm::round(self.window_ms * sample_rate as f64 / 1000.0) as usize
    }

    pub fn hop_samples(&self, sample_rate: u32) -> usize {
        libm::round(self.hop_ms * sample_rate as f64 / 1000.0) as usize
    }

    /// FFT size: the next power of two at or above the window length.
    pub fn nfft(&self, sample_rate: u32) -> usize {
        self.window_samples(sample_rate).next_power_of_two()
    }

    /// Frames per second.
    pub fn frame_rate(&self) -> f64 {
        1000.0 / self.hop_ms
    }

    /// Frame count a clip of `duration` seconds nominally maps to
    /// (500 for 10 s and 200 for 4 s at a 20 ms hop).
    pub fn nominal_frames(&self, duration: f64) -> usize {
        libm::round(duration * self.frame_rate()) as usize
    }
}

/// Number of complete frames in `num_samples` samples.
pub fn frame_count(num_samples: usize, window: usize, hop: usize) -> usize {
    if num_samples < window || hop == 0 {
        0
    } else {
        (num_samples - window) / hop + 1
    }
}

/// Symmetric Hamming window.
pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return alloc::vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * libm::cos(2.0 * core::f64::consts::PI * n as f64 / denom))
        .collect()
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * libm::log10(1.0 + hz / 700.0)
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (libm::pow(10.0, mel / 2595.0) - 1.0)
}

/// `n_mels × (nfft/2 + 1)` triangular filterbank on the HTK mel scale.
///
/// Each row is scaled so its largest weight is exactly 1.
pub fn mel_filterbank(config: &SpectrogramConfig, sample_rate: u32, nfft: usize) -> Result<Matrix> {
    config.validate(sample_rate)?;
    if nfft == 0 {
        return Err(Error::InvalidConfig("nfft must be positive".into()));
    }
    let bins = nfft / 2 + 1;
    let low = hz_to_mel(config.fmin);
    let high = hz_to_mel(config.fmax(sample_rate));
    let step = (high - low) / (config.n_mels + 1) as f64;
    let edges: Vec<f64> = (0..config.n_mels + 2)
        .map(|m| mel_to_hz(low + step * m as f64))
        .collect();
    let bin_hz = sample_rate as f64 / nfft as f64;

    let mut bank = Matrix::zeros(config.n_mels, bins);
    for band in 0..config.n_mels {
        let (lo, center, hi) = (edges[band], edges[band + 1], edges[band + 2]);
        let row = bank.row_mut(band);
        for (k, w) in row.iter_mut().enumerate() {
            let f = k as f64 * bin_hz;
            let rising = (f - lo) / (center - lo);
            let falling = (hi - f) / (hi - center);
            *w = rising.min(falling).max(0.0);
        }
        let peak = row.iter().copied().fold(0.0, f64::max);
        if peak <= 0.0 {
            return Err(Error::EmptyMelFilter { band, nfft });
        }
        for w in row.iter_mut() {
            *w /= peak;
        }
    }
    Ok(bank)
}

/// Log of the filterbank projection of each power frame, floored at `log_floor`.
pub fn log_mel_from_power(power: &Matrix, filterbank: &Matrix, log_floor: f64) -> Result<Matrix> {
    if power.cols() != filterbank.cols() {
        return Err(Error::ShapeMismatch {
            expected: (power.rows(), filterbank.cols()),
            found: power.shape(),
        });
    }
    let mut out = Matrix::zeros(power.rows(), filterbank.rows());
    for t in 0..power.rows() {
        let frame = power.row(t);
        for (band, weights) in filterbank.iter_rows().enumerate() {
            let energy: f64 = weights.iter().zip(frame).map(|(w, p)| w * p).sum();
            out[(t, band)] = libm::log(energy.max(log_floor));
        }
    }
    Ok(out)
}

/// Log-mel spectrogram: `frames × n_mels` natural-log mel energies.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    pub frames: Matrix,
    pub frame_rate: f64,
    pub sample_rate: u32,
    pub config: SpectrogramConfig,
}

impl MelSpectrogram {
    pub fn num_frames(&self) -> usize {
        self.frames.rows()
    }

    pub fn num_bands(&self) -> usize {
        self.frames.cols()
    }

    /// Same metadata, different frame matrix.
    pub fn with_frames(&self, frames: Matrix) -> Self {
        Self {
            frames,
            frame_rate: self.frame_rate,
            sample_rate: self.sample_rate,
            config: self.config,
        }
    }
}

/// Reusable extractor holding the window, FFT plan and filterbank for one
/// `(config, sample_rate)` pair.
#[derive(Debug, Clone)]
pub struct LogMelExtractor {
    config: SpectrogramConfig,
    sample_rate: u32,
    window: Vec<f64>,
    hop: usize,
    fft: Radix2Fft,
    filterbank: Matrix,
}

impl LogMelExtractor {
    pub fn new(config: SpectrogramConfig, sample_rate: u32) -> Result<Self> {
        config.validate(sample_rate)?;
        let nfft = config.nfft(sample_rate);
        Ok(Self {
            config,
            sample_rate,
            window: hamming(config.window_samples(sample_rate)),
            hop: config.hop_samples(sample_rate),
            fft: Radix2Fft::new(nfft),
            filterbank: mel_filterbank(&config, sample_rate, nfft)?,
        })
    }

    pub fn config(&self) -> &SpectrogramConfig {
        &self.config
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn filterbank(&self) -> &Matrix {
        &self.filterbank
    }

    fn check_rate(&self, clip: &AudioClip) -> Result<()> {
        if clip.sample_rate() != self.sample_rate {
            return Err(Error::InvalidConfig(alloc::format!(
                "extractor built for {} Hz, clip is {} Hz",
                self.sample_rate,
                clip.sample_rate()
            )));
        }
        Ok(())
    }

    /// `frames × (nfft/2 + 1)` power spectrogram.
    pub fn power(&self, clip: &AudioClip) -> Result<Matrix> {
        self.check_rate(clip)?;
        let samples = clip.samples();
        let window = self.window.len();
        let frames = frame_count(samples.len(), window, self.hop);
        if frames == 0 {
            return Err(Error::ClipTooShort {
                samples: samples.len(),
                window,
            });
        }
        let nfft = self.fft.len();
        let bins = nfft / 2 + 1;
        let mut power = Matrix::zeros(frames, bins);
        let mut buf = alloc::vec![(0.0, 0.0); nfft];
        for t in 0..frames {
            let start = t * self.hop;
            for (slot, (s, w)) in buf
                .iter_mut()
                .zip(samples[start..start + window].iter().zip(&self.window))
            {
                *slot = (f64::from(*s) * w, 0.0);
            }
            buf[window..].fill((0.0, 0.0));
            self.fft.process(&mut buf);
            for (p, &(re, im)) in power.row_mut(t).iter_mut().zip(&buf[..bins]) {
                *p = re * re + im * im;
            }
        }
        Ok(power)
    }

    pub fn extract(&self, clip: &AudioClip) -> Result<MelSpectrogram> {
        let power = self.power(clip)?;
        Ok(MelSpectrogram {
            frames: log_mel_from_power(&power, &self.filterbank, self.config.log_floor)?,
            frame_rate: self.config.frame_rate(),
            sample_rate: self.sample_rate,
            config: self.config,
        })
    }
}

/// Hamming-windowed STFT power of `clip`.
pub fn stft_power(clip: &AudioClip, config: &SpectrogramConfig) -> Result<Matrix> {
    LogMelExtractor::new(*config, clip.sample_rate())?.power(clip)
}

/// Log mel-bank energies of `clip`.
pub fn log_mel(clip: &AudioClip, config: &SpectrogramConfig) -> Result<MelSpectrogram> {
    LogMelExtractor::new(*config, clip.sample_rate())?.extract(clip)
}
