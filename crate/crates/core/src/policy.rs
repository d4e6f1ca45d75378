//! The policy/value network: an 11→32 ReLU trunk shared by an 8-way softmax
//! policy head and a scalar value head, with handwritten forward and backward
//! passes and norm-clipped SGD.
//!
//! At 681 parameters a tensor library would be overkill; writing the passes by
//! hand keeps the whole training step dependency-free and lets the gradient be
//! pinned against a finite-difference oracle to tight tolerances.

// Indexed loops mirror the row-major weight layout; iterator chains would
// obscure the striding that the backward pass has to match exactly.
#![allow(clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{ActionId, StateVector, STATE_DIM};

pub const HIDDEN_DIM: usize = 32;
pub const ACTION_DIM: usize = 8;

/// All learnable parameters, stored row-major per layer. Also reused as the
/// container for gradients, which have the same shape by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Trunk weights, HIDDEN_DIM × STATE_DIM.
    pub w1: Vec<f64>,
    /// Trunk bias, HIDDEN_DIM.
    pub b1: Vec<f64>,
    /// Policy head weights, ACTION_DIM × HIDDEN_DIM.
    pub wp: Vec<f64>,
    /// Policy head bias, ACTION_DIM.
    pub bp: Vec<f64>,
    /// Value head weights, HIDDEN_DIM.
    pub wv: Vec<f64>,
    /// Value head bias.
    pub bv: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamsError {
    #[error("field {field} has {got} entries, expected {expected}")]
    BadShape { field: &'static str, got: usize, expected: usize },
    #[error("field {field} contains a non-finite entry")]
    NonFinite { field: &'static str },
}

impl NetworkParams {
    pub fn zeros() -> NetworkParams {
        NetworkParams {
            w1: vec![0.0; HIDDEN_DIM * STATE_DIM],
            b1: vec![0.0; HIDDEN_DIM],
            wp: vec![0.0; ACTION_DIM * HIDDEN_DIM],
            bp: vec![0.0; ACTION_DIM],
            wv: vec![0.0; HIDDEN_DIM],
            bv: 0.0,
        }
    }

    /// Xavier-uniform initialization: each weight matrix is drawn from
    /// U(−b, b) with b = √(6/(fan_in + fan_out)); biases start at zero.
    /// Deterministic per seed.
    pub fn xavier_init(seed: u64) -> NetworkParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize, fan_in: usize, fan_out: usize| -> Vec<f64> {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..n).map(|_| rng.random::<f64>() * 2.0 * bound - bound).collect()
        };
        NetworkParams {
            w1: draw(HIDDEN_DIM * STATE_DIM, STATE_DIM, HIDDEN_DIM),
            b1: vec![0.0; HIDDEN_DIM],
            wp: draw(ACTION_DIM * HIDDEN_DIM, HIDDEN_DIM, ACTION_DIM),
            bp: vec![0.0; ACTION_DIM],
            wv: draw(HIDDEN_DIM, HIDDEN_DIM, 1),
            bv: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let checks: [(&'static str, &[f64], usize); 5] = [
            ("w1", &self.w1, HIDDEN_DIM * STATE_DIM),
            ("b1", &self.b1, HIDDEN_DIM),
            ("wp", &self.wp, ACTION_DIM * HIDDEN_DIM),
            ("bp", &self.bp, ACTION_DIM),
            ("wv", &self.wv, HIDDEN_DIM),
        ];
        for (field, values, expected) in checks {
            if values.len() != expected {
                return Err(ParamsError::BadShape { field, got: values.len(), expected });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(ParamsError::NonFinite { field });
            }
        }
        if !self.bv.is_finite() {
            return Err(ParamsError::NonFinite { field: "bv" });
        }
        Ok(())
    }

    /// Total number of scalar parameters.
    pub fn len(&self) -> usize {
        self.w1.len() + self.b1.len() + self.wp.len() + self.bp.len() + self.wv.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn param_iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.wp)
            .chain(&self.bp)
            .chain(&self.wv)
            .copied()
            .chain(std::iter::once(self.bv))
    }

    pub fn param_iter_mut(&mut self) -> impl Iterator<Item = &mut f64> + '_ {
        self.w1
            .iter_mut()
            .chain(self.b1.iter_mut())
            .chain(self.wp.iter_mut())
            .chain(self.bp.iter_mut())
            .chain(self.wv.iter_mut())
            .chain(std::iter::once(&mut self.bv))
    }

    /// Global L2 norm across every parameter.
    pub fn global_norm(&self) -> f64 {
        self.param_iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Serializes to the flat JSON checkpoint format (one ordered array per field).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params are always serializable")
    }

    /// Parses and shape-checks a checkpoint.
    pub fn from_json(text: &str) -> Result<NetworkParams, String> {
        let params: NetworkParams =
            serde_json::from_str(text).map_err(|e| format!("checkpoint parse: {e}"))?;
        params.validate().map_err(|e| format!("checkpoint invalid: {e}"))?;
        Ok(params)
    }
}

/// One forward pass, with the intermediates backward needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutput {
    pub hidden: [f64; HIDDEN_DIM],
    pub logits: [f64; ACTION_DIM],
    pub probs: [f64; ACTION_DIM],
    pub value: f64,
}

pub fn forward(params: &NetworkParams, state: &StateVector) -> PolicyOutput {
    let s = state.values();
    let mut hidden = [0.0f64; HIDDEN_DIM];
    for i in 0..HIDDEN_DIM {
        let mut pre = params.b1[i];
        for (j, sj) in s.iter().enumerate() {
            pre += params.w1[i * STATE_DIM + j] * sj;
        }
        hidden[i] = pre.max(0.0);
    }

    let mut logits = [0.0f64; ACTION_DIM];
    for k in 0..ACTION_DIM {
        let mut z = params.bp[k];
        for (i, hi) in hidden.iter().enumerate() {
            z += params.wp[k * HIDDEN_DIM + i] * hi;
        }
        logits[k] = z;
    }

    let log_probs = log_softmax(&logits);
    let mut probs = [0.0f64; ACTION_DIM];
    for k in 0..ACTION_DIM {
        probs[k] = log_probs[k].exp();
    }

    let mut value = params.bv;
    for (i, hi) in hidden.iter().enumerate() {
        value += params.wv[i] * hi;
    }

    PolicyOutput { hidden, logits, probs, value }
}

/// Max-shifted log-softmax; immune to overflow and never returns −∞ for the
/// maximal logit.
pub fn log_softmax(logits: &[f64; ACTION_DIM]) -> [f64; ACTION_DIM] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    let mut out = [0.0f64; ACTION_DIM];
    for k in 0..ACTION_DIM {
        out[k] = logits[k] - max - log_sum;
    }
    out
}

/// Policy entropy −Σ p ln p, computed from log-probabilities.
pub fn entropy(log_probs: &[f64; ACTION_DIM]) -> f64 {
    -log_probs.iter().map(|lp| lp.exp() * lp).sum::<f64>()
}

/// Draws an action from the categorical distribution in `output` and returns
/// its log-probability.
pub fn sample_action(output: &PolicyOutput, rng: &mut impl Rng) -> (ActionId, f64) {
    let u: f64 = rng.random();
    let log_probs = log_softmax(&output.logits);
    let mut cumulative = 0.0;
    for k in 0..ACTION_DIM {
        cumulative += output.probs[k];
        if u < cumulative {
            return (ActionId::from_index(k).unwrap(), log_probs[k]);
        }
    }
    // Floating-point shortfall: the cumulative sum can land a hair under 1.
    (ActionId::from_index(ACTION_DIM - 1).unwrap(), log_probs[ACTION_DIM - 1])
}

/// Loss weights. Defaults follow the training setup: clip 0.2, entropy 0.02,
/// value 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub clip_eps: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig { clip_eps: 0.2, entropy_coef: 0.02, value_coef: 0.5 }
    }
}

/// One sample of the per-step loss.
#[derive(Debug, Clone, Copy)]
pub struct LossInput<'a> {
    pub state: &'a StateVector,
    pub action: ActionId,
    /// Advantage estimate (already normalized by the trainer).
    pub advantage: f64,
    /// Return target for the value head.
    pub value_target: f64,
    /// Log-probability of `action` under the parameters that sampled it.
    pub old_log_prob: f64,
}

/// Diagnostics from one sample's loss evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    /// The clipped-surrogate term min(r·A, clip(r)·A).
    pub surrogate: f64,
    /// Squared value error (V − R̂)², before the value coefficient.
    pub value_sq_err: f64,
    pub entropy: f64,
    /// Probability ratio r = π_new(a|s)/π_old(a|s).
    pub ratio: f64,
    /// Whether the ratio left the [1−ε, 1+ε] band.
    pub clipped: bool,
}

fn check_finite(input: &LossInput) {
    assert!(
        input.advantage.is_finite()
            && input.value_target.is_finite()
            && input.old_log_prob.is_finite(),
        "loss inputs must be finite"
    );
}

/// The scalar loss backward differentiates:
/// L = −min(r·A, clip(r, 1−ε, 1+ε)·A) + c_v·(V − R̂)² − c_e·H[π].
/// Kept public so tests can difference it numerically against [`backward`].
pub fn per_sample_loss(params: &NetworkParams, input: &LossInput, cfg: &LossConfig) -> f64 {
    check_finite(input);
    let out = forward(params, input.state);
    let log_probs = log_softmax(&out.logits);
    let ratio = (log_probs[input.action.index()] - input.old_log_prob).exp();
    let unclipped = ratio * input.advantage;
    let clipped = ratio.clamp(1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * input.advantage;
    let surrogate = unclipped.min(clipped);
    let value_err = out.value - input.value_target;
    -surrogate + cfg.value_coef * value_err * value_err - cfg.entropy_coef * entropy(&log_probs)
}

/// Analytic gradient of [`per_sample_loss`] with respect to every parameter.
///
/// When the clipped branch of the surrogate is strictly active the policy
/// gradient through the ratio is exactly zero (the clamp is saturated); the
/// entropy and value terms still flow.
pub fn backward(
    params: &NetworkParams,
    input: &LossInput,
    cfg: &LossConfig,
) -> (NetworkParams, SampleStats) {
    check_finite(input);
    let out = forward(params, input.state);
    let log_probs = log_softmax(&out.logits);
    let probs = out.probs;
    let a = input.action.index();

    let ratio = (log_probs[a] - input.old_log_prob).exp();
    let unclipped = ratio * input.advantage;
    let clipped_ratio = ratio.clamp(1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
    let clipped = clipped_ratio * input.advantage;
    let surrogate = unclipped.min(clipped);
    let use_clipped = clipped < unclipped;

    let h = entropy(&log_probs);
    let value_err = out.value - input.value_target;

    // d loss / d logits.
    let mut d_logits = [0.0f64; ACTION_DIM];
    for k in 0..ACTION_DIM {
        let surrogate_term = if use_clipped {
            0.0
        } else {
            let indicator = if k == a { 1.0 } else { 0.0 };
            -input.advantage * ratio * (indicator - probs[k])
        };
        let entropy_term = cfg.entropy_coef * probs[k] * (log_probs[k] + h);
        d_logits[k] = surrogate_term + entropy_term;
    }
    // d loss / d value.
    let d_value = 2.0 * cfg.value_coef * value_err;

    let mut grad = NetworkParams::zeros();

    // Policy head.
    for k in 0..ACTION_DIM {
        grad.bp[k] = d_logits[k];
        for i in 0..HIDDEN_DIM {
            grad.wp[k * HIDDEN_DIM + i] = d_logits[k] * out.hidden[i];
        }
    }
    // Value head.
    grad.bv = d_value;
    for i in 0..HIDDEN_DIM {
        grad.wv[i] = d_value * out.hidden[i];
    }
    // Trunk: both heads' signals sum, gated by the ReLU mask.
    let s = input.state.values();
    for i in 0..HIDDEN_DIM {
        if out.hidden[i] <= 0.0 {
            continue;
        }
        let mut d_hidden = d_value * params.wv[i];
        for k in 0..ACTION_DIM {
            d_hidden += d_logits[k] * params.wp[k * HIDDEN_DIM + i];
        }
        grad.b1[i] = d_hidden;
        for (j, sj) in s.iter().enumerate() {
            grad.w1[i * STATE_DIM + j] = d_hidden * sj;
        }
    }

    let stats = SampleStats {
        surrogate,
        value_sq_err: value_err * value_err,
        entropy: h,
        ratio,
        clipped: ratio < 1.0 - cfg.clip_eps || ratio > 1.0 + cfg.clip_eps,
    };
    (grad, stats)
}

/// One SGD step with global gradient-norm clipping:
/// if ‖g‖₂ > max_norm, g is scaled to max_norm first, then θ ← θ − lr·g.
pub fn apply_update(
    params: &NetworkParams,
    gradient: &NetworkParams,
    learning_rate: f64,
    max_norm: f64,
) -> NetworkParams {
    assert!(learning_rate > 0.0, "learning_rate must be positive");
    let norm = gradient.global_norm();
    let scale = if norm > max_norm { max_norm / norm } else { 1.0 };
    let mut updated = params.clone();
    for (p, g) in updated.param_iter_mut().zip(gradient.param_iter()) {
        *p -= learning_rate * scale * g;
    }
    updated
}
