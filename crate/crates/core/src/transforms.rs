//! Orthonormal multi-dimensional DCT.
//!
//! The forward operator applies the orthonormal DCT-II along every mode in
//! order; the inverse applies its transpose (DCT-III). Both are computed in
//! direct matrix form per mode.

use rayon::prelude::*;

use crate::tensor::DenseTensor;

/// Row-major `n x n` orthonormal DCT-II matrix, `C[k][i] = c_k cos(pi (2i+1) k / 2n)`.
pub fn dct_matrix(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut c = vec![0.0; n * n];
    for k in 0..n {
        let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        for i in 0..n {
            let angle = std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf);
            c[k * n + i] = scale * angle.cos();
        }
    }
    c
}

/// Applies the 1-D orthonormal DCT-II (or its inverse) along a single mode.
///
/// # Panics
/// Panics if `mode >= t.order()`.
pub fn dct_along(t: &DenseTensor, mode: usize, inverse: bool) -> DenseTensor {
    let shape = t.shape();
    assert!(mode < shape.len(), "mode {mode} out of range");
    let n = shape[mode];
    if n == 1 {
        return t.clone();
    }
    let c = dct_matrix(n);
    // element (k, i) of the operator actually applied
    let op = |k: usize, i: usize| if inverse { c[i * n + k] } else { c[k * n + i] };
    let inner: usize = shape[..mode].iter().product();
    let block = inner * n;
    let mut out = vec![0.0; t.len()];
    out.par_chunks_mut(block)
        .zip(t.data().par_chunks(block))
        .for_each(|(dst, src)| {
            if inner == 1 {
                for (k, d) in dst.iter_mut().enumerate() {
                    *d = src.iter().enumerate().map(|(i, &x)| op(k, i) * x).sum();
                }
            } else {
                for k in 0..n {
                    let row = &mut dst[k * inner..][..inner];
                    for i in 0..n {
                        let w = op(k, i);
                        for (r, &x) in row.iter_mut().zip(&src[i * inner..][..inner]) {
                            *r += w * x;
                        }
                    }
                }
            }
        });
    DenseTensor::from_parts(shape.to_vec(), out)
}

/// Forward multi-dimensional DCT, modes 1 through N in sequence.
pub fn dct_nd(t: &DenseTensor) -> DenseTensor {
    (0..t.order()).fold(t.clone(), |acc, mode| dct_along(&acc, mode, false))
}

/// Inverse multi-dimensional DCT (the adjoint of [`dct_nd`]).
pub fn idct_nd(t: &DenseTensor) -> DenseTensor {
    (0..t.order())
        .rev()
        .fold(t.clone(), |acc, mode| dct_along(&acc, mode, true))
}
