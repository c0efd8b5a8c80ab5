//! Synthetic ground truths that are exactly low Tucker rank and DCT-sparse.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;
use crate::transforms::idct_nd;

/// Inverse DCT of a coefficient tensor supported on `rank` frequencies per
/// mode (frequency 0 always included), with standard-normal-ish
/// coefficients plus a DC offset of `offset`.
///
/// Every mode-n unfolding has rank at most `min(rank, I_n)` and at most
/// `prod_n min(rank, I_n)` DCT coefficients are nonzero.
pub fn low_rank_dct_sparse(shape: &[usize], rank: usize, offset: f64, seed: u64) -> Result<DenseTensor> {
    if rank == 0 {
        return Err(Error::InvalidParameter("rank must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support: Vec<Vec<usize>> = shape
        .iter()
        .map(|&extent| {
            let r = rank.min(extent);
            let mut freqs = vec![0];
            if r > 1 {
                freqs.extend(index::sample(&mut rng, extent - 1, r - 1).into_iter().map(|f| f + 1));
            }
            freqs.sort_unstable();
            freqs
        })
        .collect();
    let coeffs = DenseTensor::from_fn(shape, |ix| {
        let active = ix.iter().zip(&support).all(|(i, s)| s.contains(i));
        if !active {
            return 0.0;
        }
        let v: f64 = (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0;
        if ix.iter().all(|&i| i == 0) {
            v + offset
        } else {
            v
        }
    })?;
    Ok(idct_nd(&coeffs))
}
