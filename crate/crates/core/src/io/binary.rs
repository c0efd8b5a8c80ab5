//! Binary tensor (`TNSR1`) and mask (`MSK1`) files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic[4] version:u8 order:u32 extent:u32 * order payload
//! ```
//!
//! `TNSR` payloads are `prod(extents)` f64 values in storage order. `MASK`
//! payloads are the observed flags packed eight per byte, least significant
//! bit first, with the final byte zero-padded.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mask::SamplingMask;
use crate::tensor::{check_shape, DenseTensor, MAX_ORDER};

pub const TENSOR_MAGIC: &[u8; 4] = b"TNSR";
pub const MASK_MAGIC: &[u8; 4] = b"MASK";
pub const FORMAT_VERSION: u8 = 1;

fn write_header(out: &mut Vec<u8>, magic: &[u8; 4], shape: &[usize]) {
    out.extend_from_slice(magic);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&(shape.len() as u32).to_le_bytes());
    for &e in shape {
        out.extend_from_slice(&(e as u32).to_le_bytes());
    }
}

/// Parses the header and returns `(shape, payload)`.
fn read_header<'a>(path: &Path, bytes: &'a [u8], magic: &[u8; 4]) -> Result<(Vec<usize>, &'a [u8])> {
    if bytes.len() < 9 || &bytes[..4] != magic {
        return Err(Error::format(path, format!("bad magic, expected {:?}", String::from_utf8_lossy(magic))));
    }
    if bytes[4] != FORMAT_VERSION {
        return Err(Error::format(path, format!("unsupported version {}", bytes[4])));
    }
    let word = |at: usize| -> Result<usize> {
        bytes
            .get(at..at + 4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
            .ok_or_else(|| Error::format(path, "truncated header"))
    };
    let order = word(5)?;
    if order == 0 || order > MAX_ORDER {
        return Err(Error::format(path, format!("invalid order {order}")));
    }
    let shape = (0..order).map(|i| word(9 + 4 * i)).collect::<Result<Vec<_>>>()?;
    check_shape(&shape).map_err(|_| Error::format(path, format!("invalid shape {shape:?}")))?;
    Ok((shape, &bytes[9 + 4 * order..]))
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    super::image::open_buffered(path)?
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    Ok(bytes)
}

fn write_all(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| Error::io(path, e))
}

pub fn encode_tensor(t: &DenseTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(9 + 4 * t.order() + 8 * t.len());
    write_header(&mut out, TENSOR_MAGIC, t.shape());
    for v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_tensor(path: &Path, bytes: &[u8]) -> Result<DenseTensor> {
    let (shape, payload) = read_header(path, bytes, TENSOR_MAGIC)?;
    let len: usize = shape.iter().product();
    if payload.len() != 8 * len {
        return Err(Error::format(
            path,
            format!("payload has {} bytes, expected {}", payload.len(), 8 * len),
        ));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    DenseTensor::new(shape, data).map_err(|e| Error::format(path, e.to_string()))
}

pub fn encode_mask(mask: &SamplingMask) -> Vec<u8> {
    let mut out = Vec::with_capacity(9 + 4 * mask.shape().len() + mask.len().div_ceil(8));
    write_header(&mut out, MASK_MAGIC, mask.shape());
    for chunk in mask.observed().chunks(8) {
        let byte = chunk
            .iter()
            .enumerate()
            .fold(0u8, |b, (i, &o)| if o { b | (1 << i) } else { b });
        out.push(byte);
    }
    out
}

pub fn decode_mask(path: &Path, bytes: &[u8]) -> Result<SamplingMask> {
    let (shape, payload) = read_header(path, bytes, MASK_MAGIC)?;
    let len: usize = shape.iter().product();
    if payload.len() != len.div_ceil(8) {
        return Err(Error::format(
            path,
            format!("payload has {} bytes, expected {}", payload.len(), len.div_ceil(8)),
        ));
    }
    let observed = (0..len).map(|i| payload[i / 8] & (1 << (i % 8)) != 0).collect();
    SamplingMask::new(shape, observed)
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<DenseTensor> {
    let path = path.as_ref();
    decode_tensor(path, &read_all(path)?)
}

pub fn save_tensor(t: &DenseTensor, path: impl AsRef<Path>) -> Result<()> {
    write_all(path.as_ref(), &encode_tensor(t))
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<SamplingMask> {
    let path = path.as_ref();
    decode_mask(path, &read_all(path)?)
}

pub fn save_mask(mask: &SamplingMask, path: impl AsRef<Path>) -> Result<()> {
    write_all(path.as_ref(), &encode_mask(mask))
}
