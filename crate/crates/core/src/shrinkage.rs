//! Scalar shrinkage maps and the spectral proximal operators built on them.

use crate::error::{Error, Result};
use crate::linalg::{thin_svd, ThinSvd};
use crate::tensor::Matrix;

/// Reweighting vector `w_i = delta / (sigma_i + epsilon)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub w: Vec<f64>,
    pub delta: f64,
    pub epsilon: f64,
}

impl WeightVector {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn uniform(len: usize, value: f64) -> Self {
        WeightVector {
            w: vec![value; len],
            delta: value,
            epsilon: 0.0,
        }
    }
}

/// `sign(a) max(|a| - mu, 0)` for a single value.
#[inline]
pub fn soft_threshold(a: f64, mu: f64) -> f64 {
    let m = a.abs() - mu;
    if m > 0.0 {
        m.copysign(a)
    } else {
        0.0
    }
}

/// `sign(a) max(|a| - mu |a|^(p-1), 0)`, with zero mapped to zero.
#[inline]
pub fn p_threshold(a: f64, mu: f64, p: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let mag = a.abs();
    let m = mag - mu * mag.powf(p - 1.0);
    if m > 0.0 {
        m.copysign(a)
    } else {
        0.0
    }
}

pub fn soft_shrink(a: &[f64], mu: f64) -> Vec<f64> {
    a.iter().map(|&x| soft_threshold(x, mu)).collect()
}

pub fn p_shrink(a: &[f64], mu: f64, p: f64) -> Vec<f64> {
    a.iter().map(|&x| p_threshold(x, mu, p)).collect()
}

pub fn compute_weights(sigma: &[f64], delta: f64, epsilon: f64) -> WeightVector {
    WeightVector {
        w: sigma.iter().map(|&s| delta / (s + epsilon)).collect(),
        delta,
        epsilon,
    }
}

/// `max(sigma_i - mu w_i, 0)`, paired by index.
pub fn w_shrink(sigma: &[f64], mu: f64, weights: &WeightVector) -> Result<Vec<f64>> {
    if sigma.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} singular values but {} weights",
            sigma.len(),
            weights.len()
        )));
    }
    Ok(sigma
        .iter()
        .zip(&weights.w)
        .map(|(&s, &w)| (s - mu * w).max(0.0))
        .collect())
}

/// Weighted singular value thresholding `U wshrink(Sigma, mu, w) V^T`.
pub fn prox_wnn(a: &Matrix, mu: f64, weights: &WeightVector) -> Result<Matrix> {
    let svd = thin_svd(a)?;
    prox_wnn_from_svd(&svd, mu, weights)
}

pub fn prox_wnn_from_svd(svd: &ThinSvd, mu: f64, weights: &WeightVector) -> Result<Matrix> {
    svd.assemble(&w_shrink(&svd.sigma, mu, weights)?)
}

/// Spectral p-shrinkage `U pshrink(Sigma, mu, p) V^T`.
pub fn prox_pshrink_matrix(a: &Matrix, mu: f64, p: f64) -> Result<Matrix> {
    let svd = thin_svd(a)?;
    prox_pshrink_from_svd(&svd, mu, p)
}

pub fn prox_pshrink_from_svd(svd: &ThinSvd, mu: f64, p: f64) -> Result<Matrix> {
    svd.assemble(&p_shrink(&svd.sigma, mu, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// argmin_x mu |x| + (x - a)^2 / 2 by grid search then golden-section refinement.
    fn prox_l1_oracle(a: f64, mu: f64) -> f64 {
        let f = |x: f64| mu * x.abs() + 0.5 * (x - a) * (x - a);
        let span = a.abs() + mu + 1.0;
        let steps = 4000;
        let h = 2.0 * span / steps as f64;
        let mut best = -span;
        for i in 0..=steps {
            let x = -span + i as f64 * h;
            if f(x) < f(best) {
                best = x;
            }
        }
        let (mut lo, mut hi) = (best - h, best + h);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if f(x1) < f(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn soft_shrink_examples() {
        assert_eq!(soft_shrink(&[3.0, -2.0, 0.5], 1.0), vec![2.0, -1.0, 0.0]);
        assert_eq!(soft_shrink(&[0.0; 4], 0.7), vec![0.0; 4]);
    }

    #[test]
    fn soft_shrink_matches_brute_force_prox() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = rng.random_range(-5.0..5.0);
            let mu = rng.random_range(0.01..3.0);
            assert!((soft_threshold(a, mu) - prox_l1_oracle(a, mu)).abs() < 1e-6);
        }
    }

    #[test]
    fn p_shrink_examples() {
        let v = p_shrink(&[2.0], 1.0, 0.5)[0];
        assert!((v - (2.0 - 2f64.powf(-0.5))).abs() < 1e-15);
        assert!((v - 1.29289).abs() < 1e-5);
        assert_eq!(p_shrink(&[0.5], 1.0, 0.2), vec![0.0]);
        assert_eq!(p_shrink(&[0.0, -0.0], 0.3, 0.2), vec![0.0, 0.0]);
        let neg = p_shrink(&[-2.0], 1.0, 0.5)[0];
        assert_eq!(neg, -v);
    }

    #[test]
    fn p_equal_one_is_soft_thresholding() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a: Vec<f64> = (0..100).map(|_| rng.random_range(-4.0..4.0)).collect();
        assert_eq!(p_shrink(&a, 0.8, 1.0), soft_shrink(&a, 0.8));
    }

    #[test]
    fn weights() {
        let w = compute_weights(&[1.0, 0.0], 1.0, 1.0);
        assert_eq!(w.w, vec![0.5, 1.0]);
        let z = compute_weights(&[3.0, 2.0, 1.0], 0.0, 1e-6);
        assert!(z.w.iter().all(|&x| x == 0.0));
        let w = compute_weights(&[9.0, 4.0, 4.0, 0.5, 0.0], 2.0, 1e-6);
        assert!(w.w.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn w_shrink_examples() {
        let w = WeightVector { w: vec![0.5, 1.0, 2.0], delta: 1.0, epsilon: 1e-6 };
        assert_eq!(w_shrink(&[5.0, 3.0, 1.0], 1.0, &w).unwrap(), vec![4.5, 2.0, 0.0]);
        let zero = WeightVector::uniform(3, 0.0);
        assert_eq!(w_shrink(&[5.0, 3.0, 1.0], 1.0, &zero).unwrap(), vec![5.0, 3.0, 1.0]);
        let ones = WeightVector::uniform(3, 1.0);
        assert_eq!(
            w_shrink(&[5.0, 3.0, 0.5], 1.0, &ones).unwrap(),
            soft_shrink(&[5.0, 3.0, 0.5], 1.0)
        );
        assert!(w_shrink(&[1.0], 1.0, &ones).is_err());
    }

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    #[test]
    fn prox_wnn_spectrum_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_matrix(6, 4, &mut rng);
        let sigma = thin_svd(&a).unwrap().sigma;
        let gap = sigma.windows(2).map(|p| p[0] - p[1]).fold(f64::INFINITY, f64::min);
        // mu w below every gap and below the smallest value keeps full rank
        let mu = 0.25 * gap.min(*sigma.last().unwrap());
        let weights = WeightVector::uniform(4, 1.0);
        let out = prox_wnn(&a, mu, &weights).unwrap();
        let got = thin_svd(&out).unwrap().sigma;
        for (g, e) in got.iter().zip(w_shrink(&sigma, mu, &weights).unwrap()) {
            assert!(e > 0.0);
            assert!((g - e).abs() < 1e-8);
        }
        let z = Matrix::zeros(3, 5).unwrap();
        assert_eq!(prox_wnn(&z, 1.0, &WeightVector::uniform(3, 1.0)).unwrap().frob_norm(), 0.0);
    }

    /// min ||X||_* + ||X - A||^2 / (2 mu): the SVT point must beat random perturbations.
    #[test]
    fn uniform_weights_give_the_nuclear_norm_prox() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let a = random_matrix(3, 3, &mut rng);
        let mu = 0.3;
        let objective = |x: &Matrix| {
            let nuc: f64 = thin_svd(x).unwrap().sigma.iter().sum();
            nuc + x.distance(&a).unwrap().powi(2) / (2.0 * mu)
        };
        let star = prox_wnn(&a, mu, &WeightVector::uniform(3, 1.0)).unwrap();
        let best = objective(&star);
        for scale in [1e-1, 1e-2, 1e-3] {
            for _ in 0..200 {
                let d = random_matrix(3, 3, &mut rng);
                let cand = Matrix::from_fn(3, 3, |i, j| star.get(i, j) + scale * d.get(i, j)).unwrap();
                assert!(objective(&cand) >= best - 1e-12);
            }
        }
        // also the best rank-constrained candidates built from A's own factors
        let svd = thin_svd(&a).unwrap();
        for rank in 0..=3 {
            for shrink in [0.0, 0.1, 0.2, 0.3, 0.4] {
                let vals: Vec<f64> = svd
                    .sigma
                    .iter()
                    .enumerate()
                    .map(|(k, &s)| if k < rank { (s - shrink).max(0.0) } else { 0.0 })
                    .collect();
                assert!(objective(&svd.assemble(&vals).unwrap()) >= best - 1e-12);
            }
        }
    }

    #[test]
    fn pshrink_matrix_reductions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(4, 4, &mut rng);
        let p1 = prox_pshrink_matrix(&a, 0.4, 1.0).unwrap();
        let svt = prox_wnn(&a, 0.4, &WeightVector::uniform(4, 1.0)).unwrap();
        assert!(p1.distance(&svt).unwrap() < 1e-12);
        let z = Matrix::zeros(4, 2).unwrap();
        assert_eq!(prox_pshrink_matrix(&z, 1.0, 0.2).unwrap().frob_norm(), 0.0);

        let sigma = thin_svd(&a).unwrap().sigma;
        let out = prox_pshrink_matrix(&a, 0.2, 0.2).unwrap();
        let got = thin_svd(&out).unwrap().sigma;
        for (g, e) in got.iter().zip(p_shrink(&sigma, 0.2, 0.2)) {
            assert!((g - e).abs() < 1e-8);
        }
    }

    #[test]
    fn matrix_proxes_do_not_grow_the_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let a = random_matrix(5, 3, &mut rng);
            let sigma = thin_svd(&a).unwrap().sigma;
            let w = compute_weights(&sigma, 0.5, 1e-6);
            assert!(prox_wnn(&a, 0.3, &w).unwrap().frob_norm() <= a.frob_norm() + 1e-12);
            assert!(prox_pshrink_matrix(&a, 0.3, 0.5).unwrap().frob_norm() <= a.frob_norm() + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn soft_shrink_is_nonexpansive(
            a in prop::collection::vec(-10.0f64..10.0, 8),
            b in prop::collection::vec(-10.0f64..10.0, 8),
            mu in 0.0f64..5.0,
        ) {
            let sa = soft_shrink(&a, mu);
            let sb = soft_shrink(&b, mu);
            let d_out: f64 = sa.iter().zip(&sb).map(|(x, y)| (x - y).powi(2)).sum();
            let d_in: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum();
            prop_assert!(d_out <= d_in + 1e-12);
            let n_out: f64 = sa.iter().map(|x| x * x).sum();
            let n_in: f64 = a.iter().map(|x| x * x).sum();
            prop_assert!(n_out <= n_in);
        }

        #[test]
        fn smaller_p_shrinks_large_inputs_less(
            a in 1.0f64..20.0,
            mu in 0.01f64..0.9,
            p_hi in -1.0f64..1.0,
            dp in 0.0f64..1.0,
        ) {
            let p_lo = p_hi - dp;
            prop_assert!(p_threshold(a, mu, p_lo).abs() >= p_threshold(a, mu, p_hi).abs());
            prop_assert!(p_threshold(a, mu, p_hi).abs() <= a);
        }
    }
}
