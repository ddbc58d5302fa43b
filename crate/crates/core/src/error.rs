use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input contained NaN or an infinity.
    #[error("{what} contains a non-finite value")]
    NonFinite {
        /// Name of the offending input.
        what: &'static str,
    },
    /// A configuration value violated its contract.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// Two operands did not have compatible shapes.
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        /// Shape required by the operation.
        expected: (usize, usize),
        /// Shape that was supplied.
        found: (usize, usize),
    },
    /// Label vectors had different lengths.
    #[error("label length mismatch: {0} vs {1}")]
    LabelMismatch(usize, usize),
    /// A frame index fell outside `0..frames`.
    #[error("frame index {index} out of range for {frames} frames")]
    IndexOutOfRange {
        /// Requested index.
        index: usize,
        /// Number of frames available.
        frames: usize,
    },
    /// The clip holds fewer samples than a single analysis window.
    #[error("clip has {samples} samples, shorter than one {window}-sample window")]
    ClipTooShort {
        /// Samples in the clip.
        samples: usize,
        /// Samples per window.
        window: usize,
    },
    /// A mel filter covers no FFT bin.
    #[error("mel filter {band} is empty; too many bands for an FFT of size {nfft}")]
    EmptyMelFilter {
        /// Index of the empty band.
        band: usize,
        /// FFT size in use.
        nfft: usize,
    },
    /// A matrix or clip with no data.
    #[error("{0} is empty")]
    Empty(&'static str),
    /// Mixup needs at least two clips.
    #[error("mixup needs at least two clips, got {0}")]
    NotEnoughClips(usize),
}

/// Result alias for this crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;
