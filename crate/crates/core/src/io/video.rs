//! Videos as directories of frames.
//!
//! Grayscale frames stack to `H x W x F`, colour frames to `H x W x 3 x F`.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

use super::image::{read_image8, write_image8, Image8};

fn is_frame(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| ["ppm", "pgm", "png"].iter().any(|x| e.eq_ignore_ascii_case(x)))
}

/// Frame files of `dir`, sorted by file name.
pub fn frame_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_frame(p))
        .collect::<Vec<_>>();
    paths.sort();
    Ok(paths)
}

pub fn load_video(dir: impl AsRef<Path>) -> Result<DenseTensor> {
    let dir = dir.as_ref();
    let paths = frame_paths(dir)?;
    if paths.is_empty() {
        return Err(Error::format(dir, "no .ppm/.pgm/.png frames in directory"));
    }
    let frames = paths.iter().map(|p| read_image8(p)).collect::<Result<Vec<_>>>()?;
    let first = &frames[0];
    let (h, w, c) = (first.height, first.width, first.channels);
    if let Some((p, f)) = paths
        .iter()
        .zip(&frames)
        .find(|(_, f)| (f.height, f.width, f.channels) != (h, w, c))
    {
        return Err(Error::format(
            p,
            format!(
                "frame is {}x{}x{}, expected {h}x{w}x{c}",
                f.height, f.width, f.channels
            ),
        ));
    }
    let mut shape = vec![h, w];
    if c > 1 {
        shape.push(c);
    }
    shape.push(frames.len());
    let mut data = Vec::with_capacity(h * w * c * frames.len());
    for f in &frames {
        data.extend_from_slice(f.to_tensor().data());
    }
    DenseTensor::new(shape, data)
}

/// Writes `frame_00000.ppm`, `frame_00001.ppm`, ... (binary PGM payload for
/// grayscale frames). Creates `dir` if needed.
pub fn save_video(t: &DenseTensor, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let (h, w, c, frames) = match *t.shape() {
        [h, w, f] => (h, w, 1, f),
        [h, w, 3, f] => (h, w, 3, f),
        _ => {
            return Err(Error::DimensionMismatch(format!(
                "tensor of shape {:?} is not an H x W x F or H x W x 3 x F video",
                t.shape()
            )))
        }
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let frame_len = h * w * c;
    for (i, chunk) in t.data().chunks(frame_len).enumerate().take(frames) {
        let frame = DenseTensor::from_parts(vec![h, w, c], chunk.to_vec());
        write_image8(&Image8::from_tensor(&frame)?, &dir.join(format!("frame_{i:05}.ppm")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::image::{load_image, save_image};

    fn quantized(shape: &[usize], seed: usize) -> DenseTensor {
        DenseTensor::from_fn(shape, |ix| {
            let s = ix.iter().enumerate().map(|(k, &i)| i * (k + 3)).sum::<usize>() + seed;
            ((s * 37) % 256) as f64 / 255.0
        })
        .unwrap()
    }

    #[test]
    fn single_frame_adds_a_trailing_mode() {
        let dir = tempfile::tempdir().unwrap();
        let img = quantized(&[4, 5, 3], 1);
        save_image(&img, dir.path().join("only.ppm")).unwrap();
        let v = load_video(dir.path()).unwrap();
        assert_eq!(v.shape(), &[4, 5, 3, 1]);
        assert_eq!(v.data(), load_image(dir.path().join("only.ppm")).unwrap().data());
    }

    #[test]
    fn identical_frames_are_constant_along_time() {
        let dir = tempfile::tempdir().unwrap();
        let img = quantized(&[3, 4, 1], 2);
        for name in ["b.pgm", "a.pgm", "c.pgm"] {
            save_image(&img, dir.path().join(name)).unwrap();
        }
        let v = load_video(dir.path()).unwrap();
        assert_eq!(v.shape(), &[3, 4, 3]);
        for f in 0..3 {
            for r in 0..3 {
                for c in 0..4 {
                    assert_eq!(v.get(&[r, c, f]).unwrap(), img.get(&[r, c, 0]).unwrap());
                }
            }
        }
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for shape in [vec![6, 5, 4], vec![3, 2, 3, 5]] {
            let out = dir.path().join(format!("v{}", shape.len()));
            let v = quantized(&shape, 7);
            save_video(&v, &out).unwrap();
            assert!(out.join("frame_00000.ppm").exists());
            assert_eq!(load_video(&out).unwrap(), v);
        }
    }

    #[test]
    fn bad_directories() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_video(dir.path()).is_err());
        save_image(&quantized(&[3, 3, 1], 0), dir.path().join("a.pgm")).unwrap();
        save_image(&quantized(&[3, 4, 1], 0), dir.path().join("b.pgm")).unwrap();
        assert!(matches!(load_video(dir.path()), Err(Error::Format { .. })));
        assert!(save_video(&quantized(&[2, 2], 0), dir.path()).is_err());
    }
}
