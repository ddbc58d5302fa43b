//! Feature files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "EDCF"            4 bytes magic
//! 0x01              format version
//! T: u32            frames
//! F: u32            bands
//! T*F f32           row-major (time-major) values
//! n: u32            metadata length
//! n bytes           UTF-8 JSON object {"clip_id", "method", "params"}
//! ```

use std::path::Path;

use edc_core::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EDCF";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub clip_id: String,
    pub method: String,
    pub params: serde_json::Value,
}

/// A `frames × bands` tensor of finite `f32` values plus metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    frames: usize,
    bands: usize,
    data: Vec<f32>,
    pub meta: FeatureMeta,
}

impl FeatureTensor {
    pub fn new(frames: usize, bands: usize, data: Vec<f32>, meta: FeatureMeta) -> Result<Self> {
        if frames == 0 || bands == 0 {
            return Err(edc_core::Error::Empty("feature tensor").into());
        }
        if data.len() != frames * bands {
            return Err(edc_core::Error::ShapeMismatch {
                expected: (frames, bands),
                found: (data.len(), 1),
            }
            .into());
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(edc_core::Error::NonFinite {
                what: "feature tensor",
            }
            .into());
        }
        Ok(Self {
            frames,
            bands,
            data,
            meta,
        })
    }

    /// Narrows to `f32`; values outside the `f32` range are rejected.
    pub fn from_matrix(matrix: &Matrix, meta: FeatureMeta) -> Result<Self> {
        let data = matrix.as_slice().iter().map(|&v| v as f32).collect();
        Self::new(matrix.rows(), matrix.cols(), data, meta)
    }

    pub fn to_matrix(&self) -> Matrix {
        let data = self.data.iter().map(|&v| f64::from(v)).collect();
        Matrix::from_vec(self.frames, self.bands, data).expect("shape checked on construction")
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn encode(&self) -> Vec<u8> {
        let meta = serde_json::to_vec(&self.meta).expect("metadata is plain JSON");
        let mut out = Vec::with_capacity(17 + 4 * self.data.len() + meta.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&(self.frames as u32).to_le_bytes());
        out.extend_from_slice(&(self.bands as u32).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
        out.extend_from_slice(&meta);
        out
    }

    /// Parses the bytes of a feature file; `origin` names it in errors.
    pub fn decode(bytes: &[u8], origin: &Path) -> Result<Self> {
        let bad = |reason: &str| Error::format(origin, reason);
        let mut cursor = Cursor { bytes, pos: 0 };
        if cursor.take(4).ok_or_else(|| bad("truncated header"))? != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = cursor.take(1).ok_or_else(|| bad("truncated header"))?[0];
        if version != VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let frames = cursor.u32().ok_or_else(|| bad("truncated header"))? as usize;
        let bands = cursor.u32().ok_or_else(|| bad("truncated header"))? as usize;
        let payload = frames
            .checked_mul(bands)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| bad("dimensions overflow"))?;
        let raw = cursor
            .take(payload)
            .ok_or_else(|| bad("payload shorter than dimensions require"))?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let meta_len = cursor.u32().ok_or_else(|| bad("missing metadata length"))? as usize;
        let meta = cursor
            .take(meta_len)
            .ok_or_else(|| bad("metadata truncated"))?;
        if cursor.pos != bytes.len() {
            return Err(bad("trailing bytes after metadata"));
        }
        let meta: FeatureMeta =
            serde_json::from_slice(meta).map_err(|e| bad(&format!("metadata: {e}")))?;
        Self::new(frames, bands, data, meta).map_err(|e| bad(&e.to_string()))
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let slice = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(slice)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn write_features(tensor: &FeatureTensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, tensor.encode()).map_err(|e| Error::io(path, e))
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureTensor> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    FeatureTensor::decode(&bytes, path)
}
