//! Thin singular value decomposition of unfolding matrices.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::svd::{self, ComputeSvdVectors};
use faer::diag::Diag;
use faer::{Mat, MatRef, Par};

use crate::error::{Error, Result};
use crate::tensor::Matrix;

/// `A = U diag(sigma) V^T` with `r = min(m, n)` columns in `U` and `V`.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// `m x r`, orthonormal columns.
    pub u: Matrix,
    /// Nonincreasing, nonnegative, length `r`.
    pub sigma: Vec<f64>,
    /// `n x r`, orthonormal columns.
    pub v: Matrix,
}

/// Thin SVD with singular values sorted descending and the largest-magnitude
/// entry of every `u` column made nonnegative.
///
/// Always runs single threaded, so the factors are a deterministic function
/// of the input.
pub fn thin_svd(a: &Matrix) -> Result<ThinSvd> {
    if let Some(pos) = a.data().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("matrix entry {pos}")));
    }
    let (m, n) = (a.rows(), a.cols());
    let r = m.min(n);
    let view = MatRef::from_row_major_slice(a.data(), m, n);
    let mut s = Diag::<f64>::zeros(r);
    let mut u = Mat::<f64>::zeros(m, r);
    let mut v = Mat::<f64>::zeros(n, r);
    let par = Par::Seq;
    let mut mem = MemBuffer::new(svd::svd_scratch::<f64>(
        m,
        n,
        ComputeSvdVectors::Thin,
        ComputeSvdVectors::Thin,
        par,
        Default::default(),
    ));
    svd::svd(
        view,
        s.as_mut(),
        Some(u.as_mut()),
        Some(v.as_mut()),
        par,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|e| Error::Svd(format!("{e:?}")))?;

    let sv = s.column_vector();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));

    let mut sigma = Vec::with_capacity(r);
    let mut ud = vec![0.0; m * r];
    let mut vd = vec![0.0; n * r];
    for (col, &src) in order.iter().enumerate() {
        sigma.push(sv[src].max(0.0));
        let mut pivot = 0.0f64;
        for i in 0..m {
            let x = u[(i, src)];
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..m {
            ud[i * r + col] = sign * u[(i, src)];
        }
        for i in 0..n {
            vd[i * r + col] = sign * v[(i, src)];
        }
    }
    Ok(ThinSvd {
        u: Matrix::from_parts(m, r, ud),
        sigma,
        v: Matrix::from_parts(n, r, vd),
    })
}

impl ThinSvd {
    /// `U diag(values) V^T`; zero values are skipped.
    pub fn assemble(&self, values: &[f64]) -> Result<Matrix> {
        let r = self.sigma.len();
        if values.len() != r {
            return Err(Error::DimensionMismatch(format!(
                "{} singular values for a rank-{r} factorization",
                values.len()
            )));
        }
        let (m, n) = (self.u.rows(), self.v.rows());
        let active: Vec<usize> = (0..r).filter(|&k| values[k] != 0.0).collect();
        // V^T rows for the active components, scaled
        let vt: Vec<Vec<f64>> = active
            .iter()
            .map(|&k| (0..n).map(|j| values[k] * self.v.get(j, k)).collect())
            .collect();
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let row = &mut out[i * n..][..n];
            for (&k, vrow) in active.iter().zip(&vt) {
                let a = self.u.get(i, k);
                if a != 0.0 {
                    for (o, &b) in row.iter_mut().zip(vrow) {
                        *o += a * b;
                    }
                }
            }
        }
        Ok(Matrix::from_parts(m, n, out))
    }

    pub fn reconstruct(&self) -> Result<Matrix> {
        self.assemble(&self.sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0)).unwrap()
    }

    /// Orthogonal matrix from Gram-Schmidt on a random square matrix.
    fn random_rotation(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let mut cols: Vec<Vec<f64>> = Vec::new();
        while cols.len() < n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
            }
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm > 1e-6 {
                cols.push(v.into_iter().map(|x| x / nrm).collect());
            }
        }
        Matrix::from_fn(n, n, |i, j| cols[j][i]).unwrap()
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-28 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[k][p], a[k][q]);
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        ev
    }

    fn assert_orthonormal_columns(m: &Matrix, tol: f64) {
        let g = m.transpose().matmul(m).unwrap();
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((g.get(i, j) - expect).abs() <= tol, "gram[{i},{j}] = {}", g.get(i, j));
            }
        }
    }

    #[test]
    fn identity_and_diagonal() {
        let s = thin_svd(&Matrix::identity(3).unwrap()).unwrap();
        assert!(s.sigma.iter().all(|&x| (x - 1.0).abs() < 1e-14));

        let d = Matrix::from_fn(3, 3, |i, j| if i == j { [1.0, 5.0, 3.0][i] } else { 0.0 }).unwrap();
        let s = thin_svd(&d).unwrap();
        for (a, b) in s.sigma.iter().zip([5.0, 3.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        // signed permutations: one unit entry per column
        for k in 0..3 {
            let nnz = (0..3).filter(|&i| s.u.get(i, k).abs() > 1e-12).count();
            assert_eq!(nnz, 1);
            assert!((0..3).any(|i| (s.u.get(i, k) - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn random_rectangular_against_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for (m, n) in [(6, 4), (4, 6), (7, 7), (1, 5), (5, 1)] {
            let a = random_matrix(m, n, &mut rng);
            let s = thin_svd(&a).unwrap();
            assert_eq!(s.sigma.len(), m.min(n));
            assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
            assert!(s.sigma.iter().all(|&x| x >= 0.0));
            assert_orthonormal_columns(&s.u, 1e-8);
            assert_orthonormal_columns(&s.v, 1e-8);
            let back = s.reconstruct().unwrap();
            assert!(back.distance(&a).unwrap() <= 1e-8 * a.frob_norm().max(1.0));

            let g = a.transpose().matmul(&a).unwrap();
            let g = (0..n).map(|i| g.row(i).to_vec()).collect();
            let ev = jacobi_eigenvalues(g);
            for (k, &sv) in s.sigma.iter().enumerate() {
                assert!((sv - ev[k].max(0.0).sqrt()).abs() < 1e-7, "{m}x{n} sigma {k}");
            }
        }
    }

    #[test]
    fn sign_convention_and_determinism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(5, 8, &mut rng);
        let s1 = thin_svd(&a).unwrap();
        let s2 = thin_svd(&a).unwrap();
        assert_eq!(s1.u, s2.u);
        assert_eq!(s1.sigma, s2.sigma);
        for k in 0..s1.sigma.len() {
            let pivot = (0..5)
                .map(|i| s1.u.get(i, k))
                .fold(0.0f64, |p, x| if x.abs() > p.abs() { x } else { p });
            assert!(pivot >= 0.0);
        }
    }

    #[test]
    fn invariant_under_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(6, 4, &mut rng);
        let base = thin_svd(&a).unwrap().sigma;
        let left = random_rotation(6, &mut rng);
        let right = random_rotation(4, &mut rng);
        let rotated = left.matmul(&a).unwrap().matmul(&right).unwrap();
        let s = thin_svd(&rotated).unwrap().sigma;
        for (x, y) in base.iter().zip(&s) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn top_singular_value_bounds_rayleigh_quotients() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = random_matrix(6, 4, &mut rng);
        let top = thin_svd(&a).unwrap().sigma[0];
        for _ in 0..100 {
            let x = random_matrix(4, 1, &mut rng);
            let ax = a.matmul(&x).unwrap();
            assert!(ax.frob_norm() / x.frob_norm() <= top * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rejects_non_finite() {
        let a = Matrix::new(1, 2, vec![1.0, f64::INFINITY]).unwrap();
        assert!(matches!(thin_svd(&a), Err(Error::NonFinite(_))));
    }
}
