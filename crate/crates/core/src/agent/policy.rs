//! The learning policy: a Q net over encoder latents trained by one-step
//! TD on the imitation reward.
//!
//! Rewards are recomputed from the current discriminator at update time —
//! the stored environment rewards are never consumed by the learner. The
//! bootstrap target is treated as a constant (semi-gradient), so the TD
//! loss is a function of the Q parameters at the predicted action only.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    adam_step, AdamState, HiddenActivation, MlpGrads, MlpParams, MlpSpec, OutputActivation,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyModel {
    pub q_net: MlpParams,
    pub n_actions: usize,
    pub gamma: f64,
    /// Soft-Q temperature realizing the entropy bonus; `0` is hard max.
    pub entropy_weight: f64,
}

/// One TD example on detached latents.
#[derive(Debug, Clone)]
pub struct PolicyBatchItem {
    pub z: Vec<f64>,
    pub action: usize,
    pub z_next: Vec<f64>,
    pub done: bool,
}

impl PolicyModel {
    pub fn new(
        latent_dim: usize,
        n_actions: usize,
        hidden: &[usize],
        activation: HiddenActivation,
        gamma: f64,
        entropy_weight: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Config(format!(
                "policy discount must be in [0, 1), got {gamma}"
            )));
        }
        let spec = MlpSpec::with_hidden(
            latent_dim,
            hidden,
            n_actions,
            activation,
            OutputActivation::Identity,
        )?;
        Ok(PolicyModel {
            q_net: MlpParams::init(spec, rng),
            n_actions,
            gamma,
            entropy_weight,
        })
    }

    pub fn q_values(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.q_net.forward(z)
    }

    /// Greedy action with fixed-order tie break (lowest index wins).
    pub fn greedy_action(&self, z: &[f64]) -> Result<usize> {
        let q = self.q_values(z)?;
        let mut best = 0;
        for (i, v) in q.iter().enumerate().skip(1) {
            if *v > q[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Successor state value: hard max, or the soft-max free energy when
    /// the entropy weight is positive.
    fn successor_value(&self, z_next: &[f64]) -> Result<f64> {
        let q = self.q_values(z_next)?;
        let max = q.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        if self.entropy_weight > 0.0 {
            let t = self.entropy_weight;
            let lse: f64 = q.iter().map(|v| ((v - max) / t).exp()).sum();
            Ok(max + t * lse.ln())
        } else {
            Ok(max)
        }
    }
}

/// Epsilon-greedy action selection.
pub fn act(policy: &PolicyModel, z: &[f64], epsilon: f64, rng: &mut ChaCha8Rng) -> Result<usize> {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        Ok(rng.gen_range(0..policy.n_actions))
    } else {
        policy.greedy_action(z)
    }
}

/// TD targets `r + gamma * V(z') (1 - done)` under the current net.
pub fn compute_targets(
    policy: &PolicyModel,
    batch: &[PolicyBatchItem],
    rewards: &[f64],
) -> Result<Vec<f64>> {
    let mut targets = Vec::with_capacity(batch.len());
    for (item, &r) in batch.iter().zip(rewards) {
        let v = if item.done {
            0.0
        } else {
            policy.successor_value(&item.z_next)?
        };
        let t = r + policy.gamma * v;
        if !t.is_finite() {
            return Err(Error::NonFinite("policy TD target"));
        }
        targets.push(t);
    }
    Ok(targets)
}

/// Mean squared TD error against frozen targets.
pub fn td_loss(q_net: &MlpParams, batch: &[PolicyBatchItem], targets: &[f64]) -> Result<f64> {
    let inv_n = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for (item, &t) in batch.iter().zip(targets) {
        let q = q_net.forward(&item.z)?[item.action];
        loss += (q - t) * (q - t) * inv_n;
    }
    Ok(loss)
}

/// TD loss plus its gradient for the Q net (targets frozen).
pub fn td_loss_grad(
    q_net: &MlpParams,
    batch: &[PolicyBatchItem],
    targets: &[f64],
) -> Result<(f64, MlpGrads)> {
    let inv_n = 1.0 / batch.len() as f64;
    let mut grads = q_net.zero_grads();
    let mut loss = 0.0;
    let n_out = q_net.output_dim();
    for (item, &t) in batch.iter().zip(targets) {
        let cache = q_net.forward_cache(&item.z)?;
        let q = cache.output()[item.action];
        loss += (q - t) * (q - t) * inv_n;
        let mut upstream = vec![0.0; n_out];
        upstream[item.action] = 2.0 * (q - t) * inv_n;
        q_net.backward(&cache, &upstream, &mut grads)?;
    }
    Ok((loss, grads))
}

/// One Q-learning step. `reward_fn` maps (latent, action) to the imitation
/// reward; it is evaluated afresh for every batch element.
pub fn policy_update(
    policy: &mut PolicyModel,
    batch: &[PolicyBatchItem],
    reward_fn: &mut dyn FnMut(&[f64], usize) -> Result<f64>,
    opt: &mut AdamState,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Config("policy_update needs a non-empty batch".into()));
    }
    let mut rewards = Vec::with_capacity(batch.len());
    for item in batch {
        rewards.push(reward_fn(&item.z, item.action)?);
    }
    let targets = compute_targets(policy, batch, &rewards)?;
    let (loss, grads) = td_loss_grad(&policy.q_net, batch, &targets)?;
    adam_step(&mut policy.q_net, &grads, opt)?;
    Ok(loss)
}
