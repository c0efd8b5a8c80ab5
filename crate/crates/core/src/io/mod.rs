//! Reading and writing tensors, images, frame-directory videos, masks and reports.

pub mod binary;
pub mod image;
pub mod report;
pub mod video;

use std::path::Path;

use crate::error::{Error, Result};
use crate::mask::SamplingMask;
use crate::tensor::DenseTensor;

pub use binary::{load_mask, load_tensor, save_mask, save_tensor};
pub use image::{load_image, read_image8, save_image, write_image8, Image8};
pub use report::{history_csv, save_history_csv, MetricReport};
pub use video::{load_video, save_video};

/// How a path on disk is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    /// `TNSR1` binary file.
    Tensor,
    Image,
    /// Directory of frames.
    Video,
}

impl DataKind {
    pub fn of(path: &Path) -> Self {
        if path.is_dir() {
            return DataKind::Video;
        }
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("ppm" | "pgm" | "png") => DataKind::Image,
            _ => DataKind::Tensor,
        }
    }
}

/// Loads a tensor, image or video according to [`DataKind::of`].
pub fn load_any(path: impl AsRef<Path>) -> Result<(DataKind, DenseTensor)> {
    let path = path.as_ref();
    let kind = DataKind::of(path);
    let t = match kind {
        DataKind::Tensor => load_tensor(path)?,
        DataKind::Image => load_image(path)?,
        DataKind::Video => load_video(path)?,
    };
    Ok((kind, t))
}

/// Saves in the format implied by `path`: `.ppm/.pgm/.png` for images, no
/// extension (or an existing directory) for a frame directory, otherwise `TNSR1`.
pub fn save_any(t: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("ppm" | "pgm" | "png") => save_image(t, path),
        _ if path.is_dir() => save_video(t, path),
        None => save_video(t, path),
        _ => save_tensor(t, path),
    }
}

/// Loads a mask: `MSK1` files directly, images as a structural pattern
/// (pixel luma `>= 128` is observed) broadcast over the trailing modes of `shape`.
pub fn load_mask_for(path: impl AsRef<Path>, shape: &[usize]) -> Result<SamplingMask> {
    let path = path.as_ref();
    let mask = match DataKind::of(path) {
        DataKind::Image => mask_from_image(path, shape)?,
        _ => load_mask(path)?,
    };
    if mask.shape() != shape {
        return Err(Error::ShapeMismatch {
            left: mask.shape().to_vec(),
            right: shape.to_vec(),
        });
    }
    Ok(mask)
}

pub fn mask_from_image(path: impl AsRef<Path>, shape: &[usize]) -> Result<SamplingMask> {
    let img = read_image8(path.as_ref())?;
    let pattern: Vec<bool> = img.luma().iter().map(|&v| v >= 128.0).collect();
    SamplingMask::from_pattern(&pattern, img.height, img.width, shape)
}
