//! Deep successor representation over encoder latents.
//!
//! The net `psi` maps a latent to its discounted future latent occupancy
//! and trains on the TD target `z + gamma * psi_target(z_next)` (zero
//! bootstrap on terminal transitions). Both the input latent and the target
//! are plain data here: the loss is a function of `psi`'s parameters only,
//! which is exactly the stop-gradient boundary between the successor branch
//! and the encoder. The target copy is refreshed by [`SrModel::sync_target`]
//! on a fixed period of training steps.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    adam_step, AdamState, HiddenActivation, MlpGrads, MlpParams, MlpSpec, OutputActivation,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SrModel {
    pub net: MlpParams,
    pub target_net: MlpParams,
    pub gamma: f64,
    pub sync_period: u64,
    steps: u64,
}

/// One TD training example: current latent, successor latent, terminal flag.
#[derive(Debug, Clone)]
pub struct SrBatchItem {
    pub z: Vec<f64>,
    pub z_next: Vec<f64>,
    pub done: bool,
}

impl SrModel {
    pub fn new(
        latent_dim: usize,
        hidden: &[usize],
        activation: HiddenActivation,
        gamma: f64,
        sync_period: u64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Config(format!(
                "successor discount must be in [0, 1), got {gamma}"
            )));
        }
        let spec = MlpSpec::with_hidden(
            latent_dim,
            hidden,
            latent_dim,
            activation,
            OutputActivation::Identity,
        )?;
        let net = MlpParams::init(spec, rng);
        Ok(SrModel {
            target_net: net.clone(),
            net,
            gamma,
            sync_period,
            steps: 0,
        })
    }

    /// Copy the online net into the target copy. Idempotent.
    pub fn sync_target(&mut self) {
        self.target_net = self.net.clone();
    }

    /// One TD step on a batch; syncs the target every `sync_period` steps.
    pub fn train_step(&mut self, batch: &[SrBatchItem], opt: &mut AdamState) -> Result<f64> {
        let (loss, grads) = sr_td_loss_grad(self, batch)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite("successor TD loss"));
        }
        adam_step(&mut self.net, &grads, opt)?;
        self.steps += 1;
        if self.steps % self.sync_period == 0 {
            self.sync_target();
        }
        Ok(loss)
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }
}

/// Successor estimate for one latent.
pub fn sr_forward(m: &SrModel, z: &[f64]) -> Result<Vec<f64>> {
    m.net.forward(z)
}

fn td_target(m: &SrModel, item: &SrBatchItem) -> Result<Vec<f64>> {
    let mut target = item.z.clone();
    if !item.done {
        let next = m.target_net.forward(&item.z_next)?;
        for (t, n) in target.iter_mut().zip(&next) {
            *t += m.gamma * n;
        }
    }
    Ok(target)
}

/// Mean squared TD error over the batch.
pub fn sr_td_loss(m: &SrModel, batch: &[SrBatchItem]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Config("sr_td_loss needs a non-empty batch".into()));
    }
    let inv_n = 1.0 / batch.len() as f64;
    let mut loss = 0.0;
    for item in batch {
        let psi = m.net.forward(&item.z)?;
        let target = td_target(m, item)?;
        loss += psi
            .iter()
            .zip(&target)
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>()
            * inv_n;
    }
    Ok(loss)
}

/// TD loss plus the gradient for the online net. Targets are constants
/// (semi-gradient): neither the target copy nor the latents receive
/// gradient.
pub fn sr_td_loss_grad(m: &SrModel, batch: &[SrBatchItem]) -> Result<(f64, MlpGrads)> {
    if batch.is_empty() {
        return Err(Error::Config("sr_td_loss needs a non-empty batch".into()));
    }
    let inv_n = 1.0 / batch.len() as f64;
    let mut grads = m.net.zero_grads();
    let mut loss = 0.0;
    for item in batch {
        let cache = m.net.forward_cache(&item.z)?;
        let target = td_target(m, item)?;
        let psi = cache.output();
        loss += psi
            .iter()
            .zip(&target)
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>()
            * inv_n;
        let upstream: Vec<f64> = psi
            .iter()
            .zip(&target)
            .map(|(p, t)| 2.0 * (p - t) * inv_n)
            .collect();
        m.net.backward(&cache, &upstream, &mut grads)?;
    }
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff_check, AdamHyper, Matrix};
    use crate::rng::stream_rng;
    use rand::Rng;

    fn random_latents(seed: u64, n: usize, k: usize) -> Vec<Vec<f64>> {
        let mut rng = stream_rng(seed, "sr-latents");
        (0..n)
            .map(|_| (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    fn model(seed: u64, k: usize, hidden: &[usize], gamma: f64) -> SrModel {
        SrModel::new(
            k,
            hidden,
            HiddenActivation::Tanh,
            gamma,
            500,
            &mut stream_rng(seed, "sr-model"),
        )
        .unwrap()
    }

    #[test]
    fn forward_has_latent_dimension_and_is_deterministic() {
        let m = model(1, 4, &[8], 0.95);
        let z = vec![0.1, -0.2, 0.3, 0.4];
        let a = sr_forward(&m, &z).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a, sr_forward(&m, &z).unwrap());
    }

    #[test]
    fn identity_net_with_gamma_zero_has_zero_loss() {
        // psi copies its input, gamma = 0: target equals psi exactly.
        let mut m = model(2, 3, &[], 0.0);
        let spec = m.net.spec().clone();
        let mut net = MlpParams::zeros(spec);
        net.weights_mut()[0] = Matrix::eye(3);
        m.net = net;
        m.sync_target();
        let batch: Vec<SrBatchItem> = random_latents(3, 6, 3)
            .into_iter()
            .map(|z| SrBatchItem {
                z_next: z.clone(),
                z,
                done: false,
            })
            .collect();
        assert_eq!(sr_td_loss(&m, &batch).unwrap(), 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let m = model(4, 3, &[6], 0.9);
        let latents = random_latents(5, 5, 3);
        let batch: Vec<SrBatchItem> = latents
            .windows(2)
            .map(|w| SrBatchItem {
                z: w[0].clone(),
                z_next: w[1].clone(),
                done: false,
            })
            .collect();
        let (_, grads) = sr_td_loss_grad(&m, &batch).unwrap();
        let mut f = |p: &MlpParams| {
            let candidate = SrModel {
                net: p.clone(),
                target_net: m.target_net.clone(),
                gamma: m.gamma,
                sync_period: m.sync_period,
                steps: 0,
            };
            sr_td_loss(&candidate, &batch).unwrap()
        };
        let err = finite_diff_check(&mut f, &m.net, &grads, 1e-5).unwrap();
        assert!(err <= 1e-4, "relative error {err}");
    }

    #[test]
    fn gamma_zero_training_reproduces_the_input_features() {
        // With gamma = 0 the TD target collapses to the input latent, so a
        // converged psi is the identity on the training latents.
        let mut m = model(6, 4, &[32], 0.0);
        let latents = random_latents(7, 20, 4);
        let batch: Vec<SrBatchItem> = latents
            .iter()
            .map(|z| SrBatchItem {
                z: z.clone(),
                z_next: z.clone(),
                done: false,
            })
            .collect();
        let mut opt = AdamState::new(&m.net, AdamHyper::with_lr(3e-3));
        for _ in 0..2000 {
            m.train_step(&batch, &mut opt).unwrap();
        }
        let mut mse = 0.0;
        for z in &latents {
            let psi = sr_forward(&m, z).unwrap();
            mse += psi
                .iter()
                .zip(z)
                .map(|(p, t)| (p - t) * (p - t))
                .sum::<f64>()
                / (latents.len() * 4) as f64;
        }
        assert!(mse <= 1e-3, "MSE {mse}");
    }

    #[test]
    fn sync_copies_and_is_idempotent() {
        let mut m = model(8, 3, &[6], 0.9);
        let batch: Vec<SrBatchItem> = random_latents(9, 4, 3)
            .windows(2)
            .map(|w| SrBatchItem {
                z: w[0].clone(),
                z_next: w[1].clone(),
                done: false,
            })
            .collect();
        let mut opt = AdamState::new(&m.net, AdamHyper::with_lr(1e-2));
        for _ in 0..3 {
            m.train_step(&batch, &mut opt).unwrap();
        }
        assert_ne!(m.net, m.target_net);
        m.sync_target();
        assert_eq!(m.net, m.target_net);
        let snapshot = m.target_net.clone();
        m.sync_target();
        assert_eq!(m.target_net, snapshot, "sync must be idempotent");
    }

    #[test]
    fn target_is_constant_between_syncs() {
        let mut m = model(10, 3, &[6], 0.9);
        m.sync_period = 1000;
        let batch: Vec<SrBatchItem> = random_latents(11, 4, 3)
            .windows(2)
            .map(|w| SrBatchItem {
                z: w[0].clone(),
                z_next: w[1].clone(),
                done: false,
            })
            .collect();
        let before = m.target_net.clone();
        let mut opt = AdamState::new(&m.net, AdamHyper::with_lr(1e-2));
        for _ in 0..10 {
            m.train_step(&batch, &mut opt).unwrap();
        }
        assert_eq!(m.target_net, before);
    }
}
