use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Low-rank prior used for the `Y_i` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    /// Reweighted nuclear norm of every unfolding.
    #[serde(rename = "WNN")]
    Wnn,
    /// Spectral p-shrinkage penalty of every unfolding.
    #[serde(rename = "IPST")]
    Ipst,
}

/// Denominator used by the relative-change stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopMode {
    /// `‖X^{k+1} - X^k‖ / ‖X_true‖`; needs the ground truth.
    #[serde(rename = "ORACLE")]
    Oracle,
    /// `‖X^{k+1} - X^k‖ / ‖X^k‖`.
    #[serde(rename = "BLIND")]
    Blind,
}

/// Model and algorithm parameters.
///
/// An empty `alpha` means "order-dependent default", resolved by
/// [`SolverConfig::alpha_for`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct SolverConfig {
    pub model: Model,
    pub alpha: Vec<f64>,
    pub lambda: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub p: f64,
    pub beta0: f64,
    pub rho: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub stop_mode: StopMode,
    pub seed: u64,
    /// Compute the WNN weights once from the initial iterate and keep them.
    pub freeze_weights: bool,
    /// When positive, convergence additionally needs
    /// `max(‖X - Y_i‖, ‖T - D(X)‖) <= feas_tol * ‖X‖`. Zero disables the check.
    pub feas_tol: f64,
}

/// JSON form: every field except `model` may be omitted and falls back to
/// that model's default.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Model,
    alpha: Option<Vec<f64>>,
    lambda: Option<f64>,
    delta: Option<f64>,
    epsilon: Option<f64>,
    p: Option<f64>,
    beta0: Option<f64>,
    rho: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    stop_mode: Option<StopMode>,
    seed: Option<u64>,
    freeze_weights: Option<bool>,
    feas_tol: Option<f64>,
}

impl TryFrom<RawConfig> for SolverConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        let d = SolverConfig::for_model(raw.model);
        let cfg = SolverConfig {
            model: raw.model,
            alpha: raw.alpha.unwrap_or(d.alpha),
            lambda: raw.lambda.unwrap_or(d.lambda),
            delta: raw.delta.unwrap_or(d.delta),
            epsilon: raw.epsilon.unwrap_or(d.epsilon),
            p: raw.p.unwrap_or(d.p),
            beta0: raw.beta0.unwrap_or(d.beta0),
            rho: raw.rho.unwrap_or(d.rho),
            tol: raw.tol.unwrap_or(d.tol),
            max_iter: raw.max_iter.unwrap_or(d.max_iter),
            stop_mode: raw.stop_mode.unwrap_or(d.stop_mode),
            seed: raw.seed.unwrap_or(d.seed),
            freeze_weights: raw.freeze_weights.unwrap_or(d.freeze_weights),
            feas_tol: raw.feas_tol.unwrap_or(d.feas_tol),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::wnn()
    }
}

impl SolverConfig {
    pub fn wnn() -> Self {
        SolverConfig {
            model: Model::Wnn,
            alpha: Vec::new(),
            lambda: 0.05,
            delta: 1.0,
            epsilon: 1e-6,
            p: 0.2,
            beta0: 1e-5,
            rho: 1.2,
            tol: 1e-4,
            max_iter: 500,
            stop_mode: StopMode::Blind,
            seed: 0,
            freeze_weights: false,
            feas_tol: 0.0,
        }
    }

    pub fn ipst() -> Self {
        SolverConfig {
            model: Model::Ipst,
            lambda: 0.01,
            ..Self::wnn()
        }
    }

    pub fn for_model(model: Model) -> Self {
        match model {
            Model::Wnn => Self::wnn(),
            Model::Ipst => Self::ipst(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks parameter ranges that do not depend on the tensor order.
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        let finite = [
            self.lambda,
            self.delta,
            self.epsilon,
            self.p,
            self.beta0,
            self.rho,
            self.tol,
            self.feas_tol,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("all parameters must be finite");
        }
        if self.alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return bad("alpha entries must be finite and >= 0");
        }
        if self.lambda < 0.0 {
            return bad("lambda must be >= 0");
        }
        if self.delta < 0.0 {
            return bad("delta must be >= 0");
        }
        if self.epsilon <= 0.0 {
            return bad("epsilon must be > 0");
        }
        if self.p > 1.0 {
            return bad("p must be <= 1");
        }
        if self.beta0 <= 0.0 {
            return bad("beta0 must be > 0");
        }
        if self.rho <= 1.0 {
            return bad("rho must be > 1");
        }
        if self.tol <= 0.0 {
            return bad("tol must be > 0");
        }
        if self.feas_tol < 0.0 {
            return bad("feas_tol must be >= 0");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be >= 1");
        }
        Ok(())
    }

    /// Mode weights for a tensor of the given order.
    ///
    /// Defaults: `(1/3, 1/3, 1e-3)` for third-order (image) tensors and
    /// `1/N` per mode otherwise.
    pub fn alpha_for(&self, order: usize) -> Result<Vec<f64>> {
        if self.alpha.is_empty() {
            return Ok(if order == 3 {
                vec![1.0 / 3.0, 1.0 / 3.0, 1e-3]
            } else {
                vec![1.0 / order as f64; order]
            });
        }
        if self.alpha.len() != order {
            return Err(Error::InvalidParameter(format!(
                "{} alpha weights for a tensor of order {order}",
                self.alpha.len()
            )));
        }
        Ok(self.alpha.clone())
    }

    /// `beta0 * rho^k`.
    pub fn beta_at(&self, k: usize) -> f64 {
        self.beta0 * self.rho.powi(k as i32)
    }
}
