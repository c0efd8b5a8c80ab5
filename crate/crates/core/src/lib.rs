//! Tensor completion with a DCT-sparsity term plus a low-rank prior on every
//! unfolding (reweighted nuclear norm or spectral p-shrinkage), solved by an
//! ADMM scheme with a geometrically increasing penalty.

pub mod error;
pub mod io;
pub mod linalg;
pub mod mask;
pub mod metrics;
pub mod shrinkage;
pub mod solver;
pub mod synthetic;
pub mod tensor;
pub mod transforms;

pub use error::{Error, Result};
pub use mask::SamplingMask;
pub use solver::{solve, Model, Problem, Solution, SolverConfig, StopMode};
pub use tensor::{DenseTensor, Matrix};
