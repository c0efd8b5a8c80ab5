//! Observed-entry masks and the sampling projector.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{check_shape, DenseTensor};

/// The observed index set of a tensor; `true` marks an observed entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    shape: Vec<usize>,
    observed: Vec<bool>,
}

impl SamplingMask {
    pub fn new(shape: Vec<usize>, observed: Vec<bool>) -> Result<Self> {
        let len = check_shape(&shape)?;
        if observed.len() != len {
            return Err(Error::DataLength {
                shape,
                len: observed.len(),
            });
        }
        Ok(Self { shape, observed })
    }

    pub fn full(shape: &[usize]) -> Result<Self> {
        let len = check_shape(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            observed: vec![true; len],
        })
    }

    pub fn empty(shape: &[usize]) -> Result<Self> {
        let len = check_shape(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            observed: vec![false; len],
        })
    }

    /// Exactly `round(sr * len)` entries drawn uniformly without replacement.
    pub fn random(shape: &[usize], sr: f64, seed: u64) -> Result<Self> {
        if !(sr > 0.0 && sr <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sampling rate {sr} outside (0, 1]"
            )));
        }
        let len = check_shape(shape)?;
        let count = ((sr * len as f64).round() as usize).min(len);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut observed = vec![false; len];
        for i in index::sample(&mut rng, len, count) {
            observed[i] = true;
        }
        Ok(Self {
            shape: shape.to_vec(),
            observed,
        })
    }

    /// Replicates a 2-D `height x width` pattern (row-major, `pattern[r * width + c]`)
    /// across every trailing mode of `shape`.
    pub fn from_pattern(pattern: &[bool], height: usize, width: usize, shape: &[usize]) -> Result<Self> {
        let len = check_shape(shape)?;
        if pattern.len() != height * width {
            return Err(Error::DimensionMismatch(format!(
                "pattern of {} pixels is not {height}x{width}",
                pattern.len()
            )));
        }
        if shape.len() < 2 || shape[0] != height || shape[1] != width {
            return Err(Error::DimensionMismatch(format!(
                "{height}x{width} mask pattern does not match the leading modes of {shape:?}"
            )));
        }
        let plane = height * width;
        let mut observed = Vec::with_capacity(len);
        for lin in 0..len {
            let p = lin % plane;
            // storage is row-index fastest
            let (r, c) = (p % height, p / height);
            observed.push(pattern[r * width + c]);
        }
        Ok(Self {
            shape: shape.to_vec(),
            observed,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn observed(&self) -> &[bool] {
        &self.observed
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    /// `|Omega| / prod(I_n)`.
    pub fn sampling_rate(&self) -> f64 {
        self.count() as f64 / self.len() as f64
    }

    pub fn complement(&self) -> SamplingMask {
        SamplingMask {
            shape: self.shape.clone(),
            observed: self.observed.iter().map(|o| !o).collect(),
        }
    }

    pub(crate) fn check(&self, t: &DenseTensor) -> Result<()> {
        if self.shape != t.shape() {
            return Err(Error::ShapeMismatch {
                left: t.shape().to_vec(),
                right: self.shape.clone(),
            });
        }
        Ok(())
    }

    /// Keeps observed entries and zeroes the rest.
    pub fn project(&self, t: &DenseTensor) -> Result<DenseTensor> {
        self.check(t)?;
        Ok(DenseTensor::from_parts(
            t.shape().to_vec(),
            t.data()
                .iter()
                .zip(&self.observed)
                .map(|(&v, &o)| if o { v } else { 0.0 })
                .collect(),
        ))
    }
}

/// Free-function form of [`SamplingMask::project`].
pub fn project(t: &DenseTensor, mask: &SamplingMask) -> Result<DenseTensor> {
    mask.project(t)
}

/// Free-function form of [`SamplingMask::random`].
pub fn random_mask(shape: &[usize], sr: f64, seed: u64) -> Result<SamplingMask> {
    SamplingMask::random(shape, sr, seed)
}
