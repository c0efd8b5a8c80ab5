//! 8-bit images (binary PGM/PPM and PNG) as `H x W x C` tensors in `[0, 1]`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

/// Interleaved row-major 8-bit pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image8 {
    pub height: usize,
    pub width: usize,
    /// 1 (grayscale) or 3 (RGB).
    pub channels: usize,
    pub pixels: Vec<u8>,
}

impl Image8 {
    /// `H x W x C` tensor with values `p / 255`.
    pub fn to_tensor(&self) -> DenseTensor {
        let (h, w, c) = (self.height, self.width, self.channels);
        let mut data = vec![0.0; h * w * c];
        for r in 0..h {
            for col in 0..w {
                for ch in 0..c {
                    data[r + h * (col + w * ch)] = self.pixels[(r * w + col) * c + ch] as f64 / 255.0;
                }
            }
        }
        DenseTensor::from_parts(vec![h, w, c], data)
    }

    /// Quantizes an order-2 (`H x W`) or order-3 (`H x W x {1,3}`) tensor:
    /// `round(clamp(v, 0, 1) * 255)`.
    pub fn from_tensor(t: &DenseTensor) -> Result<Self> {
        let (h, w, c) = match *t.shape() {
            [h, w] => (h, w, 1),
            [h, w, c] if c == 1 || c == 3 => (h, w, c),
            _ => {
                return Err(Error::DimensionMismatch(format!(
                    "tensor of shape {:?} is not an H x W x {{1,3}} image",
                    t.shape()
                )))
            }
        };
        let mut pixels = vec![0u8; h * w * c];
        let data = t.data();
        for r in 0..h {
            for col in 0..w {
                for ch in 0..c {
                    pixels[(r * w + col) * c + ch] = quantize(data[r + h * (col + w * ch)]);
                }
            }
        }
        Ok(Image8 {
            height: h,
            width: w,
            channels: c,
            pixels,
        })
    }

    /// Per-pixel mean over channels.
    pub fn luma(&self) -> Vec<f64> {
        self.pixels
            .chunks(self.channels)
            .map(|px| px.iter().map(|&v| v as f64).sum::<f64>() / self.channels as f64)
            .collect()
    }
}

pub(crate) fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

pub fn read_image8(path: &Path) -> Result<Image8> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"\x89PNG") {
        decode_png(path, &bytes)
    } else if bytes.starts_with(b"P5") || bytes.starts_with(b"P6") {
        decode_pnm(path, &bytes)
    } else {
        Err(Error::Unsupported {
            path: path.into(),
            detail: "expected a binary PGM/PPM (P5/P6) or PNG file".into(),
        })
    }
}

fn decode_pnm(path: &Path, bytes: &[u8]) -> Result<Image8> {
    let channels = if bytes[1] == b'6' { 3 } else { 1 };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err(Error::format(path, "truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(path, "malformed header field"))?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format(path, "malformed header"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::Unsupported {
            path: path.into(),
            detail: format!("only 8-bit PNM (maxval 255) is supported, got {maxval}"),
        });
    }
    if width == 0 || height == 0 {
        return Err(Error::format(path, "zero image dimension"));
    }
    let len = width * height * channels;
    let raster = bytes
        .get(pos..pos + len)
        .ok_or_else(|| Error::format(path, "truncated raster"))?;
    Ok(Image8 {
        height,
        width,
        channels,
        pixels: raster.to_vec(),
    })
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<Image8> {
    let png_err = |e: png::DecodingError| Error::format(path, e.to_string());
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Unsupported {
            path: path.into(),
            detail: format!("only 8-bit PNG is supported, got {:?}", info.bit_depth),
        });
    }
    let (src_channels, keep) = match info.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        other => {
            return Err(Error::Unsupported {
                path: path.into(),
                detail: format!("unsupported PNG color type {other:?}"),
            })
        }
    };
    let (width, height) = (info.width as usize, info.height as usize);
    let pixels = buf[..info.buffer_size()]
        .chunks(src_channels)
        .flat_map(|px| px[..keep].iter().copied())
        .collect();
    Ok(Image8 {
        height,
        width,
        channels: keep,
        pixels,
    })
}

pub fn write_image8(img: &Image8, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    if is_png(path) {
        let mut enc = png::Encoder::new(&mut out, img.width as u32, img.height as u32);
        enc.set_color(if img.channels == 3 {
            png::ColorType::Rgb
        } else {
            png::ColorType::Grayscale
        });
        enc.set_depth(png::BitDepth::Eight);
        let encode = |e: png::EncodingError| Error::format(path, e.to_string());
        let mut writer = enc.write_header().map_err(encode)?;
        writer.write_image_data(&img.pixels).map_err(encode)?;
        writer.finish().map_err(encode)?;
    } else {
        let magic = if img.channels == 3 { "P6" } else { "P5" };
        write!(out, "{magic}\n{} {}\n255\n", img.width, img.height).map_err(|e| Error::io(path, e))?;
        out.write_all(&img.pixels).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Loads a P5/P6 or PNG file as an `H x W x C` tensor in `[0, 1]`.
pub fn load_image(path: impl AsRef<Path>) -> Result<DenseTensor> {
    Ok(read_image8(path.as_ref())?.to_tensor())
}

/// Writes an image; `.png` selects PNG, anything else binary PGM/PPM.
pub fn save_image(t: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    write_image8(&Image8::from_tensor(t)?, path.as_ref())
}

pub(crate) fn open_buffered(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_ppm_loads_as_ones() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("white.ppm");
        let mut bytes = b"P6\n# comment\n2 2\n255\n".to_vec();
        bytes.extend([255u8; 12]);
        std::fs::write(&p, bytes).unwrap();
        let t = load_image(&p).unwrap();
        assert_eq!(t.shape(), &[2, 2, 3]);
        assert!(t.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn grayscale_pgm_has_one_channel() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.pgm");
        let mut bytes = b"P5 3 2 255\n".to_vec();
        bytes.extend([0u8, 10, 20, 30, 40, 50]);
        std::fs::write(&p, bytes).unwrap();
        let t = load_image(&p).unwrap();
        assert_eq!(t.shape(), &[2, 3, 1]);
        // row 1, column 2 is byte 5
        assert_eq!(t.get(&[1, 2, 0]).unwrap(), 50.0 / 255.0);
    }

    #[test]
    fn round_trips_are_exact_in_both_codecs() {
        let dir = tempfile::tempdir().unwrap();
        let img = Image8 {
            height: 3,
            width: 5,
            channels: 3,
            pixels: (0..45).map(|v| (v * 5) as u8).collect(),
        };
        for name in ["a.ppm", "a.png"] {
            let p = dir.path().join(name);
            write_image8(&img, &p).unwrap();
            let t = load_image(&p).unwrap();
            assert_eq!(Image8::from_tensor(&t).unwrap(), img);
            let q = dir.path().join(format!("again-{name}"));
            save_image(&t, &q).unwrap();
            assert_eq!(read_image8(&q).unwrap(), img);
        }
    }

    #[test]
    fn bad_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.ppm");
        std::fs::write(&p, b"P6\n4 4\n255\n\x00\x01").unwrap();
        assert!(matches!(load_image(&p), Err(Error::Format { .. })));
        std::fs::write(&p, b"P6\n1 1\n65535\n\x00\x01\x00\x01\x00\x01").unwrap();
        assert!(matches!(load_image(&p), Err(Error::Unsupported { .. })));
        std::fs::write(&p, b"GIF89a").unwrap();
        assert!(matches!(load_image(&p), Err(Error::Unsupported { .. })));
        assert!(matches!(load_image(dir.path().join("missing.ppm")), Err(Error::Io { .. })));
    }
}
