//! Recovery-quality metrics and DCT sparsity measurements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use crate::transforms::{dct_nd, idct_nd};

/// `10 log10(#X * max(X_true)^2 / ‖X* - X_true‖_F^2)`; `+inf` for an exact match.
pub fn psnr(x_star: &DenseTensor, x_true: &DenseTensor) -> Result<f64> {
    let err2 = x_star.distance(x_true)?.powi(2);
    if err2 == 0.0 {
        return Ok(f64::INFINITY);
    }
    let peak = x_true.max();
    Ok(10.0 * (x_true.len() as f64 * peak * peak / err2).log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SsimMode {
    /// Gaussian-windowed SSIM map, averaged.
    #[default]
    Windowed,
    /// One SSIM value from whole-slice statistics.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    pub k1: f64,
    pub k2: f64,
    pub window: usize,
    pub sigma: f64,
    /// Dynamic range `L` of the pixel values.
    pub range: f64,
    pub mode: SsimMode,
}

impl SsimParams {
    pub fn new(range: f64) -> Self {
        SsimParams {
            k1: 0.01,
            k2: 0.03,
            window: 11,
            sigma: 1.5,
            range,
            mode: SsimMode::Windowed,
        }
    }

    pub fn global(range: f64) -> Self {
        SsimParams {
            mode: SsimMode::Global,
            ..Self::new(range)
        }
    }

    /// `(a1, a2) = ((k1 L)^2, (k2 L)^2)`.
    pub fn constants(&self) -> (f64, f64) {
        ((self.k1 * self.range).powi(2), (self.k2 * self.range).powi(2))
    }
}

/// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
pub fn gaussian_taps(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size as f64 - 1.0) / 2.0;
    let raw: Vec<f64> = (0..size)
        .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// A 2-D slice in storage order (row index fastest).
struct Plane<'a> {
    h: usize,
    w: usize,
    data: &'a [f64],
}

impl Plane<'_> {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r + self.h * c]
    }
}

/// "valid" correlation of `f(a, b)` with the separable window.
fn filter_valid(a: &Plane<'_>, b: &Plane<'_>, taps: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let k = taps.len();
    let (oh, ow) = (a.h + 1 - k, a.w + 1 - k);
    // filter along columns first: (oh x w)
    let mut tmp = vec![0.0; oh * a.w];
    for c in 0..a.w {
        for r in 0..oh {
            tmp[r + oh * c] = taps
                .iter()
                .enumerate()
                .map(|(i, t)| t * f(a.at(r + i, c), b.at(r + i, c)))
                .sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for c in 0..ow {
        for r in 0..oh {
            out[r + oh * c] = taps
                .iter()
                .enumerate()
                .map(|(j, t)| t * tmp[r + oh * (c + j)])
                .sum();
        }
    }
    out
}

fn ssim_windowed(x: &Plane<'_>, y: &Plane<'_>, params: &SsimParams) -> f64 {
    let (a1, a2) = params.constants();
    let taps = gaussian_taps(params.window, params.sigma);
    let mx = filter_valid(x, y, &taps, |a, _| a);
    let my = filter_valid(x, y, &taps, |_, b| b);
    let sxx = filter_valid(x, y, &taps, |a, _| a * a);
    let syy = filter_valid(x, y, &taps, |_, b| b * b);
    let sxy = filter_valid(x, y, &taps, |a, b| a * b);
    let n = mx.len();
    (0..n)
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cxy = sxy[i] - ux * uy;
            ((2.0 * ux * uy + a1) * (2.0 * cxy + a2)) / ((ux * ux + uy * uy + a1) * (vx + vy + a2))
        })
        .sum::<f64>()
        / n as f64
}

fn ssim_global(x: &Plane<'_>, y: &Plane<'_>, params: &SsimParams) -> f64 {
    let (a1, a2) = params.constants();
    let n = x.data.len() as f64;
    let ux = x.data.iter().sum::<f64>() / n;
    let uy = y.data.iter().sum::<f64>() / n;
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.data.iter().zip(y.data) {
        vx += (a - ux) * (a - ux);
        vy += (b - uy) * (b - uy);
        cxy += (a - ux) * (b - uy);
    }
    let (vx, vy, cxy) = (vx / n, vy / n, cxy / n);
    ((2.0 * ux * uy + a1) * (2.0 * cxy + a2)) / ((ux * ux + uy * uy + a1) * (vx + vy + a2))
}

/// Mean SSIM over all 2-D slices spanned by the first two modes.
pub fn ssim(x_star: &DenseTensor, x_true: &DenseTensor, params: &SsimParams) -> Result<f64> {
    x_star.check_same_shape(x_true)?;
    let shape = x_true.shape();
    let (h, w) = match shape {
        [h] => (*h, 1),
        [h, w, ..] => (*h, *w),
        [] => unreachable!(),
    };
    if params.mode == SsimMode::Windowed && (h < params.window || w < params.window) {
        return Err(Error::DimensionMismatch(format!(
            "{h}x{w} slices are smaller than the {0}x{0} SSIM window",
            params.window
        )));
    }
    let plane = h * w;
    let slices = x_true.len() / plane;
    let total: f64 = (0..slices)
        .map(|s| {
            let a = Plane { h, w, data: &x_true.data()[s * plane..][..plane] };
            let b = Plane { h, w, data: &x_star.data()[s * plane..][..plane] };
            match params.mode {
                SsimMode::Windowed => ssim_windowed(&a, &b, params),
                SsimMode::Global => ssim_global(&a, &b, params),
            }
        })
        .sum();
    Ok(total / slices as f64)
}

/// `‖x_next - x_prev‖_F / ‖denom‖_F`.
pub fn rel_change(x_next: &DenseTensor, x_prev: &DenseTensor, denom: &DenseTensor) -> Result<f64> {
    let d = denom.frob_norm();
    if d == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(x_next.distance(x_prev)? / d)
}

fn truncate_coefficients(t: &DenseTensor, tn: f64) -> Result<DenseTensor> {
    if !(tn >= 0.0) {
        return Err(Error::InvalidParameter(format!("truncation level {tn} must be >= 0")));
    }
    Ok(dct_nd(t).map(|c| if c.abs() < tn { 0.0 } else { c }))
}

/// Fraction of DCT coefficients that are zero after dropping every `|c| < tn`.
pub fn sparsity_level(t: &DenseTensor, tn: f64) -> Result<f64> {
    let c = truncate_coefficients(t, tn)?;
    Ok(c.data().iter().filter(|&&v| v == 0.0).count() as f64 / c.len() as f64)
}

/// Inverse DCT of the truncated coefficient tensor.
pub fn truncate_reconstruct(t: &DenseTensor, tn: f64) -> Result<DenseTensor> {
    Ok(idct_nd(&truncate_coefficients(t, tn)?))
}
