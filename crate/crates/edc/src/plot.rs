//! Grayscale heatmaps of feature tensors.
//!
//! Time runs left to right and mel bands bottom to top. Each tensor is
//! min-max normalised on its own; a constant tensor renders as mid-gray.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::FeatureTensor;

/// White columns between tensors drawn side by side.
pub const GAP: usize = 4;
const BACKGROUND: u8 = 255;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// One `frames × bands` pixel heatmap.
pub fn heatmap(tensor: &FeatureTensor) -> GrayImage {
    side_by_side(std::slice::from_ref(tensor))
}

/// Heatmaps placed left to right, [`GAP`] columns apart, bottom-aligned.
pub fn side_by_side(tensors: &[FeatureTensor]) -> GrayImage {
    let height = tensors.iter().map(FeatureTensor::bands).max().unwrap_or(0);
    let width = tensors.iter().map(FeatureTensor::frames).sum::<usize>()
        + GAP * tensors.len().saturating_sub(1);
    let mut pixels = vec![BACKGROUND; width * height];
    let mut left = 0;
    for tensor in tensors {
        let (lo, hi) = tensor
            .data()
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = f64::from(hi) - f64::from(lo);
        let (frames, bands) = (tensor.frames(), tensor.bands());
        for t in 0..frames {
            for f in 0..bands {
                let v = tensor.data()[t * bands + f];
                let level = if span > 0.0 {
                    ((f64::from(v) - f64::from(lo)) / span * 255.0).round() as u8
                } else {
                    128
                };
                let y = height - 1 - f;
                pixels[y * width + left + t] = level;
            }
        }
        left += frames + GAP;
    }
    GrayImage {
        width,
        height,
        pixels,
    }
}

/// Binary PGM (P5), maxval 255.
pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.pixels);
    out
}

pub fn encode_png(image: &GrayImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut encoder = png::Encoder::new(&mut out, image.width as u32, image.height as u32);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| Error::Usage(format!("cannot encode PNG: {e}")))?;
    writer
        .write_image_data(&image.pixels)
        .map_err(|e| Error::Usage(format!("cannot encode PNG: {e}")))?;
    writer
        .finish()
        .map_err(|e| Error::Usage(format!("cannot encode PNG: {e}")))?;
    Ok(out)
}

/// Writes PNG for a `.png` extension (any case) and PGM otherwise.
pub fn write_image(image: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let is_png = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    let bytes = if is_png {
        encode_png(image)?
    } else {
        encode_pgm(image)
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes)
        .and_then(|()| w.flush())
        .map_err(|e| Error::io(path, e))
}
