//! Dense N-way tensors, row-major matrices and mode-n matricization.
//!
//! Entries are stored lexicographically in `(i_1, ..., i_N)` with `i_1`
//! varying fastest. The mode-n unfolding maps entry `(i_1, ..., i_N)` to
//! row `i_n` and column `j = sum_{l != n} i_l * J_l`, where
//! `J_l = prod_{t < l, t != n} I_t` (all indices zero-based).

use crate::error::{Error, Result};

/// Largest tensor order accepted by the library.
pub const MAX_ORDER: usize = 8;

/// Dense real tensor of order `1..=MAX_ORDER`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

pub(crate) fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.len() > MAX_ORDER || shape.contains(&0) {
        return Err(Error::InvalidShape(shape.to_vec()));
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &e| acc.checked_mul(e))
        .ok_or_else(|| Error::InvalidShape(shape.to_vec()))
}

/// Column-major strides for `shape`: `stride[0] = 1`.
pub(crate) fn strides(shape: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(shape.len());
    let mut acc = 1;
    for &e in shape {
        out.push(acc);
        acc *= e;
    }
    out
}

impl DenseTensor {
    /// Builds a tensor from data in storage order. Rejects non-finite entries.
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = check_shape(&shape)?;
        if data.len() != len {
            return Err(Error::DataLength {
                shape,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("tensor entry {pos}")));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Self::filled(shape, 0.0)
    }

    pub fn filled(shape: &[usize], value: f64) -> Result<Self> {
        let len = check_shape(shape)?;
        if !value.is_finite() {
            return Err(Error::NonFinite("fill value".into()));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data: vec![value; len],
        })
    }

    /// Builds a tensor by evaluating `f` at every zero-based multi-index.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = check_shape(shape)?;
        let mut idx = vec![0usize; shape.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for (i, e) in idx.iter_mut().zip(shape) {
                *i += 1;
                if *i < *e {
                    break;
                }
                *i = 0;
            }
        }
        Self::new(shape.to_vec(), data)
    }

    /// Internal constructor for results of arithmetic on valid tensors.
    pub(crate) fn from_parts(shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Linear storage offset of a zero-based multi-index.
    pub fn offset(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.shape.len() || index.iter().zip(&self.shape).any(|(i, e)| i >= e) {
            return Err(Error::DimensionMismatch(format!(
                "index {index:?} outside shape {:?}",
                self.shape
            )));
        }
        Ok(index
            .iter()
            .zip(strides(&self.shape))
            .map(|(i, s)| i * s)
            .sum())
    }

    pub fn get(&self, index: &[usize]) -> Result<f64> {
        Ok(self.data[self.offset(index)?])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub(crate) fn check_same_shape(&self, other: &DenseTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(())
    }

    /// Sum of componentwise products.
    pub fn inner(&self, other: &DenseTensor) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `‖self - other‖_F`.
    pub fn distance(&self, other: &DenseTensor) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseTensor {
        DenseTensor::from_parts(self.shape.clone(), self.data.iter().map(|&v| f(v)).collect())
    }

    /// Entrywise `f(self, other)`.
    pub fn zip_with(&self, other: &DenseTensor, f: impl Fn(f64, f64) -> f64) -> Result<DenseTensor> {
        self.check_same_shape(other)?;
        Ok(DenseTensor::from_parts(
            self.shape.clone(),
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn scale(&self, c: f64) -> DenseTensor {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &DenseTensor, c: f64) -> Result<DenseTensor> {
        self.zip_with(other, |a, b| a + c * b)
    }

    /// Mode-`mode` matricization (zero-based mode), an `I_mode x prod_{l != mode} I_l` matrix.
    pub fn unfold(&self, mode: usize) -> Result<Matrix> {
        let order = self.order();
        if mode >= order {
            return Err(Error::ModeOutOfRange { mode, order });
        }
        let extent = self.shape[mode];
        let inner: usize = self.shape[..mode].iter().product();
        let outer: usize = self.shape[mode + 1..].iter().product();
        let cols = inner * outer;
        let mut out = vec![0.0; self.data.len()];
        for b in 0..outer {
            for i in 0..extent {
                let src = &self.data[inner * (i + extent * b)..][..inner];
                out[i * cols + inner * b..][..inner].copy_from_slice(src);
            }
        }
        Ok(Matrix {
            rows: extent,
            cols,
            data: out,
        })
    }

    /// Inverse of [`DenseTensor::unfold`].
    pub fn fold(m: &Matrix, mode: usize, shape: &[usize]) -> Result<DenseTensor> {
        let len = check_shape(shape)?;
        let order = shape.len();
        if mode >= order {
            return Err(Error::ModeOutOfRange { mode, order });
        }
        let extent = shape[mode];
        if m.rows != extent || m.rows * m.cols != len {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix cannot fold along mode {mode} into {shape:?}",
                m.rows, m.cols
            )));
        }
        let inner: usize = shape[..mode].iter().product();
        let outer: usize = shape[mode + 1..].iter().product();
        let cols = m.cols;
        let mut data = vec![0.0; len];
        for b in 0..outer {
            for i in 0..extent {
                let src = &m.data[i * cols + inner * b..][..inner];
                data[inner * (i + extent * b)..][..inner].copy_from_slice(src);
            }
        }
        DenseTensor::new(shape.to_vec(), data)
    }
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("empty {rows}x{cols} matrix")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::new(rows, cols, data)
    }

    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(rows * cols, data.len());
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..][..self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = vec![0.0; self.data.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        Matrix::from_parts(self.cols, self.rows, data)
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let n = other.cols;
        let mut data = vec![0.0; self.rows * n];
        for r in 0..self.rows {
            let out = &mut data[r * n..][..n];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a != 0.0 {
                    for (o, &b) in out.iter_mut().zip(other.row(k)) {
                        *o += a * b;
                    }
                }
            }
        }
        Ok(Matrix::from_parts(self.rows, n, data))
    }

    pub fn frob_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Matrix) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn enumerated_cube() -> DenseTensor {
        // a_{ijk} = 100 i + 10 j + k with one-based indices
        DenseTensor::from_fn(&[2, 2, 2], |ix| {
            (100 * (ix[0] + 1) + 10 * (ix[1] + 1) + (ix[2] + 1)) as f64
        })
        .unwrap()
    }

    /// Column index straight from the one-based formula, used as an oracle.
    fn column_oracle(index: &[usize], shape: &[usize], n: usize) -> usize {
        let mut j = 1;
        for l in 1..=shape.len() {
            if l == n {
                continue;
            }
            let jl: usize = (1..l).filter(|&t| t != n).map(|t| shape[t - 1]).product();
            j += (index[l - 1] - 1) * jl;
        }
        j
    }

    #[test]
    fn mode_two_unfolding_matches_enumeration() {
        let m = enumerated_cube().unfold(1).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.row(0), &[111.0, 211.0, 112.0, 212.0]);
        assert_eq!(m.row(1), &[121.0, 221.0, 122.0, 222.0]);
    }

    #[test]
    fn unfold_agrees_with_index_formula_on_every_entry() {
        let shape = [3, 2, 4, 2];
        let t = DenseTensor::from_fn(&shape, |ix| {
            ix.iter().enumerate().map(|(d, &i)| (i as f64) * 10f64.powi(d as i32)).sum()
        })
        .unwrap();
        for n in 1..=shape.len() {
            let m = t.unfold(n - 1).unwrap();
            for lin in 0..t.len() {
                let mut rem = lin;
                let idx: Vec<usize> = shape
                    .iter()
                    .map(|&e| {
                        let i = rem % e;
                        rem /= e;
                        i + 1
                    })
                    .collect();
                let j = column_oracle(&idx, &shape, n);
                assert_eq!(m.get(idx[n - 1] - 1, j - 1), t.data()[lin]);
            }
        }
    }

    #[test]
    fn matrix_unfolds_to_itself_along_first_mode() {
        let t = DenseTensor::from_fn(&[3, 4], |ix| (ix[0] * 4 + ix[1]) as f64).unwrap();
        let m = t.unfold(0).unwrap();
        for r in 0..3 {
            for c in 0..4 {
                assert_eq!(m.get(r, c), t.get(&[r, c]).unwrap());
            }
        }
    }

    #[test]
    fn fold_edge_cases() {
        let row = Matrix::new(1, 4, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let t = DenseTensor::fold(&row, 0, &[1, 4]).unwrap();
        assert_eq!(t.data(), &[1.0, 2.0, 3.0, 4.0]);

        let z = DenseTensor::fold(&Matrix::zeros(2, 6).unwrap(), 1, &[3, 2]);
        assert!(z.is_err());
        let z = DenseTensor::fold(&Matrix::zeros(2, 6).unwrap(), 1, &[3, 2, 2]).unwrap();
        assert_eq!(z.frob_norm(), 0.0);
    }

    #[test]
    fn mode_out_of_range_is_rejected() {
        let t = DenseTensor::zeros(&[2, 2]).unwrap();
        assert!(matches!(t.unfold(2), Err(Error::ModeOutOfRange { mode: 2, order: 2 })));
    }

    #[test]
    fn invalid_shapes() {
        assert!(DenseTensor::zeros(&[]).is_err());
        assert!(DenseTensor::zeros(&[2, 0]).is_err());
        assert!(DenseTensor::zeros(&[1; 9]).is_err());
        assert!(DenseTensor::new(vec![2, 2], vec![0.0; 3]).is_err());
        assert!(DenseTensor::new(vec![1], vec![f64::NAN]).is_err());
    }

    #[test]
    fn inner_and_norm_basics() {
        let t = enumerated_cube();
        let z = DenseTensor::zeros(&[2, 2, 2]).unwrap();
        assert_eq!(t.inner(&z).unwrap(), 0.0);
        let e = DenseTensor::from_fn(&[2, 3], |ix| if ix == [1, 2] { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(e.frob_norm(), 1.0);
        assert!(t.inner(&DenseTensor::zeros(&[2, 2]).unwrap()).is_err());
    }

    fn tensor_strategy() -> impl Strategy<Value = DenseTensor> {
        prop::collection::vec(1usize..4, 1..=5).prop_flat_map(|shape| {
            let len: usize = shape.iter().product();
            prop::collection::vec(-10.0f64..10.0, len)
                .prop_map(move |data| DenseTensor::new(shape.clone(), data).unwrap())
        })
    }

    proptest! {
        #[test]
        fn fold_inverts_unfold(t in tensor_strategy()) {
            for n in 0..t.order() {
                let m = t.unfold(n).unwrap();
                let back = DenseTensor::fold(&m, n, t.shape()).unwrap();
                prop_assert_eq!(&back, &t);
                prop_assert!((m.frob_norm() - t.frob_norm()).abs() <= 1e-12 * (1.0 + t.frob_norm()));
            }
        }
    }
}
