//! PPO training loop pieces: the transition buffer, GAE advantage estimation,
//! and the per-episode clipped-surrogate update.

use serde::{Deserialize, Serialize};

use crate::mdp::{ActionId, StateVector};
use crate::policy::{
    apply_update, backward, forward, LossConfig, LossInput, NetworkParams,
};

/// One step of experience, with the sampling-time policy outputs frozen in.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: StateVector,
    pub action: ActionId,
    /// ln π_old(action | state), captured when the action was sampled.
    pub log_prob_old: f64,
    /// V_old(state), captured when the action was sampled.
    pub value_old: f64,
    pub reward: f64,
    pub next_state: StateVector,
    pub terminal: bool,
}

/// GAE output, aligned with the buffer it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageBatch {
    /// Raw (unnormalized) Â_t.
    pub advantages: Vec<f64>,
    /// Value targets R̂_t = Â_t + value_old_t.
    pub returns: Vec<f64>,
}

/// Rolling window of the most recent transitions. One-episode updates are
/// degenerate for PPO's ratio term, so the trainer replays this window every
/// episode instead.
#[derive(Debug, Clone, Default)]
pub struct TransitionBuffer {
    items: Vec<Transition>,
    capacity: usize,
}

impl TransitionBuffer {
    pub fn new(capacity: usize) -> TransitionBuffer {
        assert!(capacity >= 1, "buffer capacity must be at least 1");
        TransitionBuffer { items: Vec::with_capacity(capacity), capacity }
    }

    /// Appends a transition, evicting the oldest when full.
    pub fn push(&mut self, transition: Transition) {
        if self.items.len() == self.capacity {
            self.items.remove(0);
        }
        self.items.push(transition);
    }

    pub fn as_slice(&self) -> &[Transition] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Hyperparameters for GAE and the update step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    pub gamma: f64,
    pub lambda: f64,
    pub clip_eps: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub buffer_capacity: usize,
    pub max_grad_norm: f64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            gamma: 0.99,
            lambda: 0.95,
            clip_eps: 0.2,
            entropy_coef: 0.02,
            value_coef: 0.5,
            learning_rate: 0.01,
            epochs: 4,
            buffer_capacity: 16,
            max_grad_norm: 1.0,
        }
    }
}

impl TrainerConfig {
    fn loss_config(&self) -> LossConfig {
        LossConfig {
            clip_eps: self.clip_eps,
            entropy_coef: self.entropy_coef,
            value_coef: self.value_coef,
        }
    }
}

/// Averages reported by one [`ppo_update`] call, across every epoch pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    /// Mean clipped-surrogate value min(r·Â, clip(r)·Â).
    pub mean_surrogate: f64,
    /// Mean squared value error (V − R̂)².
    pub value_loss: f64,
    /// Mean policy entropy.
    pub entropy: f64,
    /// Fraction of samples whose ratio left the [1−ε, 1+ε] band.
    pub clip_fraction: f64,
}

/// Backward GAE recursion:
/// δ_t = r_t + γ·V(s_{t+1})·(1−terminal_t) − V(s_t),
/// Â_t = δ_t + γλ·(1−terminal_t)·Â_{t+1},
/// where V(s_{t+1}) is the next transition's sampling-time value, or
/// `bootstrap_value` for the buffer tail.
///
/// Panics on an empty buffer (contract violation).
pub fn compute_gae(
    buffer: &[Transition],
    gamma: f64,
    lambda: f64,
    bootstrap_value: f64,
) -> AdvantageBatch {
    assert!(!buffer.is_empty(), "compute_gae requires a non-empty buffer");

    let n = buffer.len();
    let mut advantages = vec![0.0f64; n];
    let mut next_advantage = 0.0;
    for t in (0..n).rev() {
        let tr = &buffer[t];
        let v_next = if t + 1 < n { buffer[t + 1].value_old } else { bootstrap_value };
        let not_terminal = if tr.terminal { 0.0 } else { 1.0 };
        let delta = tr.reward + gamma * v_next * not_terminal - tr.value_old;
        let adv = delta + gamma * lambda * not_terminal * next_advantage;
        advantages[t] = adv;
        next_advantage = adv;
    }
    let returns = advantages
        .iter()
        .zip(buffer)
        .map(|(a, tr)| a + tr.value_old)
        .collect();
    AdvantageBatch { advantages, returns }
}

/// One training update: GAE over the buffer (bootstrapping from the current
/// value of the last next_state unless terminal), advantage normalization when
/// the buffer holds at least two samples, then `epochs` full-buffer gradient
/// steps with norm clipping.
///
/// Panics on an empty buffer (contract violation).
pub fn ppo_update(
    params: &NetworkParams,
    buffer: &[Transition],
    cfg: &TrainerConfig,
) -> (NetworkParams, UpdateStats) {
    assert!(!buffer.is_empty(), "ppo_update requires a non-empty buffer");
    debug_assert!(buffer.iter().all(|t| t.log_prob_old <= 0.0 && t.reward.is_finite()));

    let last = buffer.last().unwrap();
    let bootstrap_value =
        if last.terminal { 0.0 } else { forward(params, &last.next_state).value };
    let batch = compute_gae(buffer, cfg.gamma, cfg.lambda, bootstrap_value);

    let mut advantages = batch.advantages.clone();
    if advantages.len() >= 2 {
        let n = advantages.len() as f64;
        let mean = advantages.iter().sum::<f64>() / n;
        let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
        let std = var.sqrt() + 1e-8;
        for a in advantages.iter_mut() {
            *a = (*a - mean) / std;
        }
    }

    let loss_cfg = cfg.loss_config();
    let mut current = params.clone();
    let mut sum_surrogate = 0.0;
    let mut sum_value_loss = 0.0;
    let mut sum_entropy = 0.0;
    let mut clipped_count = 0usize;
    let samples_per_epoch = buffer.len();

    for _ in 0..cfg.epochs {
        let mut grad_sum = NetworkParams::zeros();
        for (i, tr) in buffer.iter().enumerate() {
            let input = LossInput {
                state: &tr.state,
                action: tr.action,
                advantage: advantages[i],
                value_target: batch.returns[i],
                old_log_prob: tr.log_prob_old,
            };
            let (grad, stats) = backward(&current, &input, &loss_cfg);
            for (acc, g) in grad_sum.param_iter_mut().zip(grad.param_iter()) {
                *acc += g;
            }
            sum_surrogate += stats.surrogate;
            sum_value_loss += stats.value_sq_err;
            sum_entropy += stats.entropy;
            clipped_count += stats.clipped as usize;
        }
        let inv = 1.0 / samples_per_epoch as f64;
        for g in grad_sum.param_iter_mut() {
            *g *= inv;
        }
        current = apply_update(&current, &grad_sum, cfg.learning_rate, cfg.max_grad_norm);
    }

    let total_samples = (cfg.epochs * samples_per_epoch) as f64;
    let stats = UpdateStats {
        mean_surrogate: sum_surrogate / total_samples,
        value_loss: sum_value_loss / total_samples,
        entropy: sum_entropy / total_samples,
        clip_fraction: clipped_count as f64 / total_samples,
    };
    (current, stats)
}
