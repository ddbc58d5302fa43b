//! Spectrogram feature conditioning.
//!
//! This crate holds the pure numerical side of the toolkit:
//!
//! - [`features`]: log mel-bank energies from a Hamming-windowed STFT.
//! - [`edc`]: event-related data conditioning. Every frame is rebuilt as a
//!   masked-softmax average over a local window whose extent is the
//!   attenuated expectation of similarity offsets in each direction.
//! - [`augment`]: SpecAugment-style masking/warping and Mixup baselines.
//! - [`dataset`]: padding, labels and original-size/augmented training set
//!   construction.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, audio decoding
//! and the command line live in the `edc` crate.
//!
//! ```
//! use edc_core::{edc, AttenuationConfig, Matrix};
//!
//! let spec = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
//! let out = edc::apply_edc(&spec, &AttenuationConfig::new(10.0).unwrap()).unwrap();
//! assert_eq!(out.shape(), (3, 2));
//! ```

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod augment;
pub mod dataset;
pub mod edc;
mod error;
pub mod features;
mod fft;
mod matrix;

pub use augment::{MaskFill, MaskSpec, MixupConfig, SpecAugmentConfig, WarpSpec};
pub use dataset::{ConditioningMethod, DatasetMode, LabeledClip};
pub use edc::{AttenuationConfig, Rounding};
pub use error::{Error, Result};
pub use features::{AudioClip, MelSpectrogram, SpectrogramConfig};
pub use matrix::Matrix;
