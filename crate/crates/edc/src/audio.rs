//! WAV decoding.
//!
//! Integer PCM (8, 16, 24 or 32 bit) is scaled by the type's full-scale value
//! and IEEE float is taken as is. Channels are averaged to mono. No
//! resampling is done; the sample rate travels with the clip.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use edc_core::AudioClip;
use hound::{SampleFormat, WavReader};

use crate::error::{Error, Result};

pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = WavReader::new(BufReader::new(file)).map_err(|e| wav_error(path, e))?;
    decode(path, reader)
}

fn wav_error(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::MalformedWav {
                path: path.to_path_buf(),
                reason: "truncated file".into(),
            }
        }
        hound::Error::IoError(e) => Error::io(path, e),
        // hound reports well-formed headers with bit depths it cannot read
        // as format errors.
        hound::Error::FormatError(reason) if reason.starts_with("bits per sample is not") => {
            Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                reason: reason.into(),
            }
        }
        hound::Error::FormatError(reason) => Error::MalformedWav {
            path: path.to_path_buf(),
            reason: reason.into(),
        },
        hound::Error::UnfinishedSample => Error::MalformedWav {
            path: path.to_path_buf(),
            reason: "data chunk ends inside a sample".into(),
        },
        other => Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

fn decode<R: std::io::Read>(path: &Path, mut reader: WavReader<R>) -> Result<AudioClip> {
    let spec = reader.spec();
    let channels = usize::from(spec.channels);
    if channels == 0 {
        return Err(Error::MalformedWav {
            path: path.to_path_buf(),
            reason: "zero channels".into(),
        });
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let full_scale = f64::from(1u32 << (bits - 1));
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) / full_scale))
                .collect::<Result<_, _>>()
                .map_err(|e| wav_error(path, e))?
        }
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(|e| wav_error(path, e))?,
        (format, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                reason: format!("{bits}-bit {format:?} samples"),
            })
        }
    };
    let samples: Vec<f32> = interleaved
        .chunks_exact(channels)
        .map(|frame| (frame.iter().sum::<f64>() / channels as f64) as f32)
        .collect();
    AudioClip::new(samples, spec.sample_rate).map_err(|e| match e {
        edc_core::Error::Empty(_) => Error::MalformedWav {
            path: path.to_path_buf(),
            reason: "no samples".into(),
        },
        other => other.into(),
    })
}
