//! ADMM solvers for DCT-sparse + low-rank tensor completion.
//!
//! Both models share one iteration: the low-rank blocks `Y_i`, then the
//! data-consistent `X`, then the DCT coefficients `T`, then the multipliers
//! `S_i` and `Q`, then `beta <- rho * beta`. Only the `Y_i` proximal map
//! differs between [`Model::Wnn`] and [`Model::Ipst`].

mod config;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{Model, SolverConfig, StopMode};

use crate::error::{Error, Result};
use crate::linalg::thin_svd;
use crate::mask::SamplingMask;
use crate::shrinkage::{compute_weights, p_shrink, soft_threshold, w_shrink, WeightVector};
use crate::tensor::DenseTensor;
use crate::transforms::{dct_nd, idct_nd};

/// The penalty parameter is never allowed past this value.
pub const BETA_LIMIT: f64 = 1e300;

/// Observed data for one completion run.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    /// `H`; only entries in the mask are read.
    pub observed: &'a DenseTensor,
    pub mask: &'a SamplingMask,
    /// Ground truth, required for [`StopMode::Oracle`].
    pub truth: Option<&'a DenseTensor>,
}

impl<'a> Problem<'a> {
    pub fn new(observed: &'a DenseTensor, mask: &'a SamplingMask) -> Self {
        Problem {
            observed,
            mask,
            truth: None,
        }
    }

    pub fn with_truth(mut self, truth: &'a DenseTensor) -> Self {
        self.truth = Some(truth);
        self
    }
}

/// Full ADMM iterate.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: DenseTensor,
    pub y: Vec<DenseTensor>,
    /// DCT-domain auxiliary variable.
    pub t: DenseTensor,
    pub s: Vec<DenseTensor>,
    pub q: DenseTensor,
    pub beta: f64,
    pub k: usize,
    /// WNN weights last applied to each mode (`None` for IPST or `alpha_i = 0`).
    pub weights: Vec<Option<WeightVector>>,
    /// `‖Y_i,(i)‖_{*,w}` under `weights`; zero where no weighted penalty applies.
    pub penalties: Vec<f64>,
    alpha: Vec<f64>,
}

impl SolverState {
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
}

/// Result of the low-rank block update.
#[derive(Debug, Clone)]
pub struct LowRankUpdate {
    pub y: Vec<DenseTensor>,
    pub weights: Vec<Option<WeightVector>>,
    pub penalties: Vec<f64>,
}

/// Result of the sparse block update, with `D(X^{k+1})` kept for reuse.
#[derive(Debug, Clone)]
pub struct SparseUpdate {
    pub t: DenseTensor,
    pub dct_x: DenseTensor,
}

/// Augmented Lagrangian value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lagrangian {
    pub value: f64,
    /// `true` when the low-rank penalty term is omitted (IPST has no closed form for it).
    pub partial: bool,
}

/// Per-iteration diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport {
    pub k: usize,
    pub relcha: f64,
    pub feas_y: Vec<f64>,
    pub feas_t: f64,
    pub lagrangian: f64,
    pub lagrangian_partial: bool,
    /// Penalty parameter used during this iteration.
    pub beta: f64,
    pub elapsed_ms: f64,
}

/// KKT residuals of an iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    /// `‖X - Y_i‖_F` per mode.
    pub feas_y: Vec<f64>,
    /// `‖T - D(X)‖_F`.
    pub feas_t: f64,
    /// `‖sum_i S_i - D^{-1}(Q)‖_F`.
    pub multiplier_balance: f64,
    /// The same balance restricted to unobserved entries, where the `X`
    /// stationarity condition applies without a constraint multiplier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier_balance_unobserved: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIter,
    PenaltyLimit,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: DenseTensor,
    pub history: Vec<IterationReport>,
    pub stop: StopReason,
    pub state: SolverState,
}

impl Solution {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    pub fn iterations(&self) -> usize {
        self.history.len()
    }
}

fn check_problem(problem: &Problem<'_>) -> Result<()> {
    problem.mask.check(problem.observed)?;
    if let Some(truth) = problem.truth {
        problem.observed.check_same_shape(truth)?;
    }
    Ok(())
}

/// Singular values of each unfolding with the weights derived from them.
fn weighted_penalty(y: &DenseTensor, mode: usize, cfg: &SolverConfig) -> Result<(WeightVector, f64)> {
    let sigma = thin_svd(&y.unfold(mode)?)?.sigma;
    let w = compute_weights(&sigma, cfg.delta, cfg.epsilon);
    let pen = sigma.iter().zip(&w.w).map(|(s, w)| s * w).sum();
    Ok((w, pen))
}

/// Initial iterate: observed entries of `H`, unobserved ones set to the
/// observed mean; `Y_i = X`, `T = D(X)`, zero multipliers.
pub fn init_state(h: &DenseTensor, mask: &SamplingMask, cfg: &SolverConfig) -> Result<SolverState> {
    cfg.validate()?;
    mask.check(h)?;
    let count = mask.count();
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    let alpha = cfg.alpha_for(h.order())?;
    let mean = h
        .data()
        .iter()
        .zip(mask.observed())
        .filter(|(_, &o)| o)
        .map(|(v, _)| v)
        .sum::<f64>()
        / count as f64;
    let x = DenseTensor::from_parts(
        h.shape().to_vec(),
        h.data()
            .iter()
            .zip(mask.observed())
            .map(|(&v, &o)| if o { v } else { mean })
            .collect(),
    );
    let n = h.order();
    let zero = DenseTensor::zeros(h.shape())?;

    let (weights, penalties): (Vec<_>, Vec<_>) = if cfg.model == Model::Wnn {
        (0..n)
            .into_par_iter()
            .map(|i| {
                if alpha[i] == 0.0 {
                    Ok((None, 0.0))
                } else {
                    weighted_penalty(&x, i, cfg).map(|(w, p)| (Some(w), p))
                }
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip()
    } else {
        (vec![None; n], vec![0.0; n])
    };

    Ok(SolverState {
        t: dct_nd(&x),
        y: vec![x.clone(); n],
        s: vec![zero.clone(); n],
        q: zero,
        x,
        beta: cfg.beta0,
        k: 0,
        weights,
        penalties,
        alpha,
    })
}

/// Proximal step on every `Y_i` at `Yhat_i = X^k + S_i^k / beta_k`.
pub fn update_y(state: &SolverState, cfg: &SolverConfig) -> Result<LowRankUpdate> {
    let beta = state.beta;
    let shape = state.x.shape();
    let results = (0..state.y.len())
        .into_par_iter()
        .map(|i| -> Result<(DenseTensor, Option<WeightVector>, f64)> {
            let yhat = state.x.add_scaled(&state.s[i], 1.0 / beta)?;
            let alpha = state.alpha[i];
            if alpha == 0.0 {
                return Ok((yhat, None, 0.0));
            }
            let mu = alpha / beta;
            let svd = thin_svd(&yhat.unfold(i)?)?;
            match cfg.model {
                Model::Wnn => {
                    let weights = match (&state.weights[i], cfg.freeze_weights) {
                        (Some(w), true) => w.clone(),
                        _ => compute_weights(&svd.sigma, cfg.delta, cfg.epsilon),
                    };
                    let vals = w_shrink(&svd.sigma, mu, &weights)?;
                    let mut sorted = vals.clone();
                    sorted.sort_by(|a, b| b.total_cmp(a));
                    let penalty = sorted.iter().zip(&weights.w).map(|(s, w)| s * w).sum();
                    if weights.w.iter().all(|&w| mu * w == 0.0) {
                        return Ok((yhat, Some(weights), penalty));
                    }
                    let y = DenseTensor::fold(&svd.assemble(&vals)?, i, shape)?;
                    Ok((y, Some(weights), penalty))
                }
                Model::Ipst => {
                    let vals = p_shrink(&svd.sigma, mu, cfg.p);
                    let y = DenseTensor::fold(&svd.assemble(&vals)?, i, shape)?;
                    Ok((y, None, 0.0))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut update = LowRankUpdate {
        y: Vec::with_capacity(results.len()),
        weights: Vec::with_capacity(results.len()),
        penalties: Vec::with_capacity(results.len()),
    };
    for (y, w, p) in results {
        update.y.push(y);
        update.weights.push(w);
        update.penalties.push(p);
    }
    Ok(update)
}

/// Data-consistent `X` update; expects `state.y` already advanced.
pub fn update_x(state: &SolverState, h: &DenseTensor, mask: &SamplingMask) -> Result<DenseTensor> {
    mask.check(h)?;
    let beta = state.beta;
    let n = state.y.len();
    let mut xhat = idct_nd(&state.t.add_scaled(&state.q, 1.0 / beta)?);
    for (y, s) in state.y.iter().zip(&state.s) {
        let acc = xhat.data_mut();
        for ((a, &yv), &sv) in acc.iter_mut().zip(y.data()).zip(s.data()) {
            *a += yv - sv / beta;
        }
    }
    let scale = 1.0 / (n as f64 + 1.0);
    let data = xhat
        .data()
        .iter()
        .zip(h.data())
        .zip(mask.observed())
        .map(|((&xv, &hv), &o)| if o { hv } else { scale * xv })
        .collect();
    Ok(DenseTensor::from_parts(h.shape().to_vec(), data))
}

/// Soft-thresholding of `D(X^{k+1}) - Q^k / beta_k` at `lambda / beta_k`;
/// expects `state.x` already advanced.
pub fn update_t(state: &SolverState, cfg: &SolverConfig) -> SparseUpdate {
    let beta = state.beta;
    let dct_x = dct_nd(&state.x);
    let mu = cfg.lambda / beta;
    let t = DenseTensor::from_parts(
        dct_x.shape().to_vec(),
        dct_x
            .data()
            .iter()
            .zip(state.q.data())
            .map(|(&d, &q)| soft_threshold(d - q / beta, mu))
            .collect(),
    );
    SparseUpdate { t, dct_x }
}

/// Dual ascent for `S_i` and `Q`; expects `x`, `y`, `t` already advanced and
/// `dct_x = D(state.x)`.
pub fn update_multipliers(state: &SolverState, dct_x: &DenseTensor) -> Result<(Vec<DenseTensor>, DenseTensor)> {
    let beta = state.beta;
    let s = state
        .s
        .par_iter()
        .zip(&state.y)
        .map(|(s, y)| {
            let diff = state.x.sub(y)?;
            s.add_scaled(&diff, beta)
        })
        .collect::<Result<Vec<_>>>()?;
    let q = state.q.add_scaled(&state.t.sub(dct_x)?, beta)?;
    Ok((s, q))
}

/// Augmented Lagrangian at the current iterate and `state.beta`, using the
/// cached weighted penalties. `dct_x` may be passed to skip recomputing `D(X)`.
pub fn augmented_lagrangian(state: &SolverState, cfg: &SolverConfig, dct_x: Option<&DenseTensor>) -> Result<Lagrangian> {
    let beta = state.beta;
    let owned;
    let dct_x = match dct_x {
        Some(d) => d,
        None => {
            owned = dct_nd(&state.x);
            &owned
        }
    };
    let mut value = 0.0;
    for i in 0..state.y.len() {
        let diff = state.x.sub(&state.y[i])?;
        value += state.s[i].inner(&diff)? + 0.5 * beta * diff.frob_norm().powi(2);
        if cfg.model == Model::Wnn {
            value += state.alpha[i] * state.penalties[i];
        }
    }
    let l1: f64 = state.t.data().iter().map(|v| v.abs()).sum();
    let gap = state.t.sub(dct_x)?;
    value += cfg.lambda * l1 + state.q.inner(&gap)? + 0.5 * beta * gap.frob_norm().powi(2);
    Ok(Lagrangian {
        value,
        partial: cfg.model == Model::Ipst,
    })
}

pub fn kkt_residuals(state: &SolverState) -> Result<KktResiduals> {
    kkt_impl(state, None)
}

/// [`kkt_residuals`] plus the balance on the complement of `mask`.
pub fn kkt_residuals_masked(state: &SolverState, mask: &SamplingMask) -> Result<KktResiduals> {
    mask.check(&state.x)?;
    kkt_impl(state, Some(mask))
}

fn kkt_impl(state: &SolverState, mask: Option<&SamplingMask>) -> Result<KktResiduals> {
    let feas_y = state
        .y
        .iter()
        .map(|y| state.x.distance(y))
        .collect::<Result<Vec<_>>>()?;
    let feas_t = state.t.distance(&dct_nd(&state.x))?;
    let mut sum_s = DenseTensor::zeros(state.x.shape())?;
    for s in &state.s {
        sum_s = sum_s.add(s)?;
    }
    let gap = sum_s.sub(&idct_nd(&state.q))?;
    let multiplier_balance_unobserved = mask.map(|m| {
        gap.data()
            .iter()
            .zip(m.observed())
            .filter(|(_, &o)| !o)
            .map(|(v, _)| v * v)
            .sum::<f64>()
            .sqrt()
    });
    Ok(KktResiduals {
        feas_y,
        feas_t,
        multiplier_balance: gap.frob_norm(),
        multiplier_balance_unobserved,
    })
}

fn ensure_finite(state: &SolverState) -> Result<()> {
    let named = std::iter::once(("X", &state.x))
        .chain(state.y.iter().map(|y| ("Y", y)))
        .chain(std::iter::once(("T", &state.t)))
        .chain(state.s.iter().map(|s| ("S", s)))
        .chain(std::iter::once(("Q", &state.q)));
    for (name, t) in named {
        if !t.is_finite() {
            return Err(Error::Diverged {
                iteration: state.k,
                detail: format!("non-finite entries in {name}"),
            });
        }
    }
    Ok(())
}

/// Relative change with the denominator chosen by the stop mode.
fn relcha_denominator(state: &SolverState, problem: &Problem<'_>, cfg: &SolverConfig) -> Result<f64> {
    match cfg.stop_mode {
        StopMode::Oracle => problem.truth.map(DenseTensor::frob_norm).ok_or(Error::MissingTruth),
        StopMode::Blind => Ok(state.x.frob_norm()),
    }
}

/// One full ADMM iteration.
pub fn step(state: &SolverState, problem: &Problem<'_>, cfg: &SolverConfig) -> Result<(SolverState, IterationReport)> {
    let started = Instant::now();
    let denom = relcha_denominator(state, problem, cfg)?;
    let beta = state.beta;
    let mut next = state.clone();

    let low_rank = update_y(&next, cfg)?;
    next.y = low_rank.y;
    next.weights = low_rank.weights;
    next.penalties = low_rank.penalties;

    next.x = update_x(&next, problem.observed, problem.mask)?;

    let sparse = update_t(&next, cfg);
    next.t = sparse.t;

    let (s, q) = update_multipliers(&next, &sparse.dct_x)?;
    next.s = s;
    next.q = q;
    next.k = state.k + 1;
    ensure_finite(&next)?;

    let lagrangian = augmented_lagrangian(&next, cfg, Some(&sparse.dct_x))?;
    next.beta = cfg.beta_at(next.k);

    let diff = next.x.distance(&state.x)?;
    let relcha = if denom > 0.0 {
        diff / denom
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let feas_y = next
        .y
        .iter()
        .map(|y| next.x.distance(y))
        .collect::<Result<Vec<_>>>()?;
    let feas_t = next.t.distance(&sparse.dct_x)?;
    let report = IterationReport {
        k: next.k,
        relcha,
        feas_y,
        feas_t,
        lagrangian: lagrangian.value,
        lagrangian_partial: lagrangian.partial,
        beta,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    Ok((next, report))
}

fn feasible(report: &IterationReport, state: &SolverState, cfg: &SolverConfig) -> bool {
    if cfg.feas_tol == 0.0 {
        return true;
    }
    let worst = report.feas_y.iter().copied().fold(report.feas_t, f64::max);
    worst <= cfg.feas_tol * state.x.frob_norm()
}

/// Runs [`step`] until the relative change drops to `cfg.tol` (checked from
/// the second iteration on, and only once feasible if `cfg.feas_tol > 0`),
/// `cfg.max_iter` is reached, or the next penalty would exceed [`BETA_LIMIT`].
pub fn solve(problem: &Problem<'_>, cfg: &SolverConfig) -> Result<Solution> {
    solve_with_observer(problem, cfg, |_, _| {})
}

/// [`solve`] with a callback invoked after every iteration.
pub fn solve_with_observer(
    problem: &Problem<'_>,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&SolverState, &IterationReport),
) -> Result<Solution> {
    check_problem(problem)?;
    if cfg.stop_mode == StopMode::Oracle && problem.truth.is_none() {
        return Err(Error::MissingTruth);
    }
    let mut state = init_state(problem.observed, problem.mask, cfg)?;
    let mut history = Vec::new();
    let stop = loop {
        if state.k >= cfg.max_iter {
            break StopReason::MaxIter;
        }
        if cfg.beta_at(state.k + 1) > BETA_LIMIT {
            break StopReason::PenaltyLimit;
        }
        let (next, report) = step(&state, problem, cfg)?;
        observer(&next, &report);
        let done = report.k >= 2 && report.relcha <= cfg.tol && feasible(&report, &next, cfg);
        history.push(report);
        state = next;
        if done {
            break StopReason::Converged;
        }
    };
    Ok(Solution {
        x: state.x.clone(),
        history,
        stop,
        state,
    })
}
