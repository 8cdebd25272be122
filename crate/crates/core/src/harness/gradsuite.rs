//! The finite-difference gradient suite.
//!
//! Every trained objective in the crate — autoencoder loss, combined
//! adversarial loss, successor TD loss, policy TD loss — is checked on
//! small random nets and batches against central finite differences. The
//! suite backs both the `check-grad` CLI command and the acceptance tests.

use rand::Rng;

use crate::adversary::{
    adversary_loss, adversary_loss_grad, build_context, AdversaryHyper, Discriminator,
};
use crate::agent::{compute_targets, td_loss, td_loss_grad, PolicyBatchItem, PolicyModel};
use crate::error::Result;
use crate::numerics::{
    finite_diff_check, finite_diff_check_models, HiddenActivation, MlpParams,
};
use crate::representation::{
    wae::resolve_batch_kernel, wae_loss, wae_loss_grad, KernelSpec, sample_prior, WaeModel,
};
use crate::rng::stream_rng;
use crate::successor::{sr_td_loss, sr_td_loss_grad, SrBatchItem, SrModel};

#[derive(Debug, Clone)]
pub struct GradCheckCase {
    pub loss: &'static str,
    pub seed: u64,
    pub max_rel_err: f64,
}

const FD_STEP: f64 = 1e-5;

fn random_states(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, "grad-states");
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

fn random_actions(seed: u64, n: usize, n_actions: usize) -> Vec<usize> {
    let mut rng = stream_rng(seed, "grad-actions");
    (0..n).map(|_| rng.gen_range(0..n_actions)).collect()
}

/// Worst relative FD error of the autoencoder loss over encoder and
/// decoder parameters jointly.
pub fn check_wae_loss(seed: u64) -> Result<f64> {
    let obs_dim = 5;
    let k = 3;
    let wae = WaeModel::new(
        obs_dim,
        k,
        &[6],
        HiddenActivation::Tanh,
        KernelSpec::rbf_median(),
        1.0,
        &mut stream_rng(seed, "grad-wae"),
    )?;
    let states = random_states(seed.wrapping_add(1), 5, obs_dim);
    let prior = sample_prior(5, k, &mut stream_rng(seed, "grad-prior"));
    let latents = wae.encode_batch(&states)?;
    let kernel = resolve_batch_kernel(&wae, &latents, &prior);
    let (_, grads) = wae_loss_grad(&wae, &states, &prior, &kernel)?;
    let mut f = |params: &[MlpParams]| {
        let candidate = WaeModel {
            encoder: params[0].clone(),
            decoder: params[1].clone(),
            latent_dim: wae.latent_dim,
            kernel: wae.kernel.clone(),
            prior_weight: wae.prior_weight,
        };
        wae_loss(&candidate, &states, &prior, &kernel).expect("loss")
    };
    finite_diff_check_models(
        &mut f,
        &[&wae.encoder, &wae.decoder],
        &[&grads.encoder, &grads.decoder],
        FD_STEP,
    )
}

/// Worst relative FD error of the combined adversarial objective over
/// encoder, decoder, and discriminator parameters jointly.
pub fn check_adversary_loss(seed: u64) -> Result<f64> {
    let obs_dim = 5;
    let k = 3;
    let n_actions = 3;
    let mut rng = stream_rng(seed, "grad-adv");
    let wae = WaeModel::new(
        obs_dim,
        k,
        &[6],
        HiddenActivation::Tanh,
        KernelSpec::rbf_median(),
        1.0,
        &mut rng,
    )?;
    let d = Discriminator::new(k, n_actions, &[6], HiddenActivation::Tanh, &mut rng)?;
    let hyper = AdversaryHyper::default();
    let ps = random_states(seed.wrapping_add(2), 5, obs_dim);
    let pa = random_actions(seed.wrapping_add(3), 5, n_actions);
    let es = random_states(seed.wrapping_add(4), 5, obs_dim);
    let ea = random_actions(seed.wrapping_add(5), 5, n_actions);
    let ctx = build_context(&wae, &ps, &es, &mut stream_rng(seed, "grad-ctx"))?;
    let (_, grads) = adversary_loss_grad(&d, &wae, (&ps, &pa), (&es, &ea), &ctx, &hyper)?;
    let mut f = |params: &[MlpParams]| {
        let wae2 = WaeModel {
            encoder: params[0].clone(),
            decoder: params[1].clone(),
            latent_dim: wae.latent_dim,
            kernel: wae.kernel.clone(),
            prior_weight: wae.prior_weight,
        };
        let d2 = Discriminator {
            net: params[2].clone(),
            latent_dim: d.latent_dim,
            n_actions: d.n_actions,
        };
        adversary_loss(&d2, &wae2, (&ps, &pa), (&es, &ea), &ctx, &hyper).expect("loss")
    };
    finite_diff_check_models(
        &mut f,
        &[&wae.encoder, &wae.decoder, &d.net],
        &[&grads.wae.encoder, &grads.wae.decoder, &grads.discriminator],
        FD_STEP,
    )
}

/// Worst relative FD error of the successor TD loss over the online net.
/// The latents are data here, so encoder parameters receive no gradient by
/// construction (the stop-gradient boundary).
pub fn check_sr_loss(seed: u64) -> Result<f64> {
    let k = 3;
    let m = SrModel::new(
        k,
        &[6],
        HiddenActivation::Tanh,
        0.9,
        500,
        &mut stream_rng(seed, "grad-sr"),
    )?;
    let latents = random_states(seed.wrapping_add(6), 6, k);
    let batch: Vec<SrBatchItem> = latents
        .windows(2)
        .enumerate()
        .map(|(i, w)| SrBatchItem {
            z: w[0].clone(),
            z_next: w[1].clone(),
            done: i % 3 == 2,
        })
        .collect();
    let (_, grads) = sr_td_loss_grad(&m, &batch)?;
    let target_net = m.target_net.clone();
    let mut f = |p: &MlpParams| {
        let mut candidate = m.clone();
        candidate.net = p.clone();
        candidate.target_net = target_net.clone();
        sr_td_loss(&candidate, &batch).expect("loss")
    };
    finite_diff_check(&mut f, &m.net, &grads, FD_STEP)
}

/// Worst relative FD error of the policy TD loss over the Q net (frozen
/// targets).
pub fn check_policy_loss(seed: u64) -> Result<f64> {
    let k = 3;
    let n_actions = 3;
    let policy = PolicyModel::new(
        k,
        n_actions,
        &[6],
        HiddenActivation::Tanh,
        0.9,
        0.0,
        &mut stream_rng(seed, "grad-policy"),
    )?;
    let mut rng = stream_rng(seed.wrapping_add(7), "grad-policy-batch");
    let batch: Vec<PolicyBatchItem> = (0..5)
        .map(|_| PolicyBatchItem {
            z: (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            action: rng.gen_range(0..n_actions),
            z_next: (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            done: rng.gen::<bool>(),
        })
        .collect();
    let rewards: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let targets = compute_targets(&policy, &batch, &rewards)?;
    let (_, grads) = td_loss_grad(&policy.q_net, &batch, &targets)?;
    let mut f = |q: &MlpParams| td_loss(q, &batch, &targets).expect("loss");
    finite_diff_check(&mut f, &policy.q_net, &grads, FD_STEP)
}

/// Run every check over `n_seeds` seeds.
pub fn run_grad_suite(n_seeds: u64) -> Result<Vec<GradCheckCase>> {
    let mut cases = Vec::new();
    for seed in 0..n_seeds {
        cases.push(GradCheckCase {
            loss: "wae_loss",
            seed,
            max_rel_err: check_wae_loss(seed)?,
        });
        cases.push(GradCheckCase {
            loss: "adversary_loss",
            seed,
            max_rel_err: check_adversary_loss(seed)?,
        });
        cases.push(GradCheckCase {
            loss: "sr_td_loss",
            seed,
            max_rel_err: check_sr_loss(seed)?,
        });
        cases.push(GradCheckCase {
            loss: "policy_td_loss",
            seed,
            max_rel_err: check_policy_loss(seed)?,
        });
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_on_a_few_seeds() {
        for case in run_grad_suite(3).unwrap() {
            assert!(
                case.max_rel_err <= 1e-4,
                "{} seed {}: {}",
                case.loss,
                case.seed,
                case.max_rel_err
            );
        }
    }
}
