//! Deterministic-encoder Wasserstein autoencoder.
//!
//! The training objective on a batch of states is
//!
//! `mean_i ||s_i - G(phi(s_i))||^2 + prior_weight * mmd2(phi(batch), prior)`
//!
//! with the prior a unit Gaussian in latent space and a fresh prior sample
//! of batch size drawn per call. Median kernel bandwidths are resolved from
//! the batch before differentiation and held constant through it.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    ForwardCache, HiddenActivation, MlpGrads, MlpParams, MlpSpec, OutputActivation,
};
use crate::representation::kernel::{KernelSpec, ResolvedKernel};
use crate::representation::mmd::{mmd_grad_resolved, mmd_resolved};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaeModel {
    pub encoder: MlpParams,
    pub decoder: MlpParams,
    pub latent_dim: usize,
    pub kernel: KernelSpec,
    /// Weight on the prior-matching MMD term.
    pub prior_weight: f64,
}

/// Gradients of a WAE-style loss for both nets.
#[derive(Debug, Clone)]
pub struct WaeGrads {
    pub encoder: MlpGrads,
    pub decoder: MlpGrads,
}

impl WaeModel {
    pub fn new(
        obs_dim: usize,
        latent_dim: usize,
        hidden: &[usize],
        activation: HiddenActivation,
        kernel: KernelSpec,
        prior_weight: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let enc_spec = MlpSpec::with_hidden(
            obs_dim,
            hidden,
            latent_dim,
            activation,
            OutputActivation::Identity,
        )?;
        let dec_spec = MlpSpec::with_hidden(
            latent_dim,
            hidden,
            obs_dim,
            activation,
            OutputActivation::Identity,
        )?;
        Ok(WaeModel {
            encoder: MlpParams::init(enc_spec, rng),
            decoder: MlpParams::init(dec_spec, rng),
            latent_dim,
            kernel,
            prior_weight,
        })
    }

    /// Deterministic latent code of one observation.
    pub fn encode(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.encoder.forward(s)
    }

    pub fn encode_batch(&self, states: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        states.iter().map(|s| self.encode(s)).collect()
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.latent_dim {
            return Err(Error::shape("decode latent", self.latent_dim, z.len()));
        }
        self.decoder.forward(z)
    }

    pub fn zero_grads(&self) -> WaeGrads {
        WaeGrads {
            encoder: self.encoder.zero_grads(),
            decoder: self.decoder.zero_grads(),
        }
    }
}

impl WaeGrads {
    pub fn scale(&mut self, s: f64) {
        self.encoder.scale(s);
        self.decoder.scale(s);
    }
}

/// Fresh i.i.d. sample from the unit Gaussian prior.
pub fn sample_prior(n: usize, latent_dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..latent_dim)
                .map(|_| StandardNormal.sample(rng))
                .collect()
        })
        .collect()
}

/// Mean squared reconstruction cost of one state given its decoder output.
fn recon_cost(state: &[f64], recon: &[f64]) -> f64 {
    state
        .iter()
        .zip(recon)
        .map(|(s, r)| (s - r) * (s - r))
        .sum()
}

pub(crate) struct EncodedBatch {
    pub caches: Vec<ForwardCache>,
    pub latents: Vec<Vec<f64>>,
}

pub(crate) fn encode_batch_cached(model: &WaeModel, states: &[Vec<f64>]) -> Result<EncodedBatch> {
    let mut caches = Vec::with_capacity(states.len());
    let mut latents = Vec::with_capacity(states.len());
    for s in states {
        let c = model.encoder.forward_cache(s)?;
        latents.push(c.output().to_vec());
        caches.push(c);
    }
    Ok(EncodedBatch { caches, latents })
}

/// Reconstruction + prior-matching terms, scaled by `weight`.
///
/// Decoder gradients accumulate into `grads.decoder`; the gradient with
/// respect to each latent accumulates into `latent_upstream` so the caller
/// can combine several loss terms before one encoder backward pass.
pub(crate) fn wae_terms_grad(
    model: &WaeModel,
    states: &[Vec<f64>],
    latents: &[Vec<f64>],
    prior: &[Vec<f64>],
    kernel: &ResolvedKernel,
    weight: f64,
    latent_upstream: &mut [Vec<f64>],
    grads: &mut WaeGrads,
) -> Result<f64> {
    let n = states.len();
    if prior.len() != n {
        return Err(Error::shape("prior sample size", n, prior.len()));
    }
    let inv_n = 1.0 / n as f64;
    let mut loss = 0.0;
    for i in 0..n {
        let cache = model.decoder.forward_cache(&latents[i])?;
        let recon = cache.output();
        loss += recon_cost(&states[i], recon) * inv_n;
        let upstream: Vec<f64> = recon
            .iter()
            .zip(&states[i])
            .map(|(r, s)| 2.0 * (r - s) * inv_n * weight)
            .collect();
        let dz = model.decoder.backward(&cache, &upstream, &mut grads.decoder)?;
        for (u, d) in latent_upstream[i].iter_mut().zip(&dz) {
            *u += d;
        }
    }
    let (prior_mmd, gx, _) = mmd_grad_resolved(latents, prior, kernel)?;
    loss += model.prior_weight * prior_mmd;
    let w = weight * model.prior_weight;
    for (u, g) in latent_upstream.iter_mut().zip(&gx) {
        for (ui, gi) in u.iter_mut().zip(g) {
            *ui += w * gi;
        }
    }
    Ok(loss)
}

/// Value of the autoencoder loss on a batch, with a caller-supplied prior
/// sample and resolved kernel (so gradient checks can pin both).
pub fn wae_loss(
    model: &WaeModel,
    states: &[Vec<f64>],
    prior: &[Vec<f64>],
    kernel: &ResolvedKernel,
) -> Result<f64> {
    if states.len() < 2 {
        return Err(Error::Config(format!(
            "wae_loss needs a batch of at least 2 states, got {}",
            states.len()
        )));
    }
    let latents = model.encode_batch(states)?;
    let inv_n = 1.0 / states.len() as f64;
    let mut loss = 0.0;
    for (s, z) in states.iter().zip(&latents) {
        loss += recon_cost(s, &model.decode(z)?) * inv_n;
    }
    loss += model.prior_weight * mmd_resolved(&latents, prior, kernel)?;
    Ok(loss)
}

/// Loss plus gradients for encoder and decoder.
pub fn wae_loss_grad(
    model: &WaeModel,
    states: &[Vec<f64>],
    prior: &[Vec<f64>],
    kernel: &ResolvedKernel,
) -> Result<(f64, WaeGrads)> {
    let encoded = encode_batch_cached(model, states)?;
    let mut grads = model.zero_grads();
    let mut latent_upstream = vec![vec![0.0; model.latent_dim]; states.len()];
    let loss = wae_terms_grad(
        model,
        states,
        &encoded.latents,
        prior,
        kernel,
        1.0,
        &mut latent_upstream,
        &mut grads,
    )?;
    for (cache, upstream) in encoded.caches.iter().zip(&latent_upstream) {
        model.encoder.backward_params_only(cache, upstream, &mut grads.encoder)?;
    }
    Ok((loss, grads))
}

/// Resolve the model's kernel over an encoded batch plus the prior sample.
pub fn resolve_batch_kernel(
    model: &WaeModel,
    latents: &[Vec<f64>],
    prior: &[Vec<f64>],
) -> ResolvedKernel {
    let combined: Vec<&[f64]> = latents.iter().chain(prior.iter()).map(Vec::as_slice).collect();
    model.kernel.resolve(&combined)
}

/// MMD between the encoded policy batch and the encoded expert batch.
/// Either pool empty means there is nothing to contrast yet, so the term is
/// skipped and contributes zero.
pub fn adversarial_reg(
    model: &WaeModel,
    policy_states: &[Vec<f64>],
    expert_states: &[Vec<f64>],
) -> Result<f64> {
    if policy_states.is_empty() || expert_states.is_empty() {
        return Ok(0.0);
    }
    let zp = model.encode_batch(policy_states)?;
    let ze = model.encode_batch(expert_states)?;
    let combined: Vec<&[f64]> = zp.iter().chain(ze.iter()).map(Vec::as_slice).collect();
    let kernel = model.kernel.resolve(&combined);
    mmd_resolved(&zp, &ze, &kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_diff_check_models, AdamHyper, AdamState, Matrix};
    use crate::rng::stream_rng;

    fn small_model(seed: u64, obs_dim: usize, k: usize) -> WaeModel {
        WaeModel::new(
            obs_dim,
            k,
            &[8],
            HiddenActivation::Tanh,
            KernelSpec::rbf_median(),
            1.0,
            &mut stream_rng(seed, "wae-test"),
        )
        .unwrap()
    }

    fn random_states(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
        use rand::Rng;
        let mut rng = stream_rng(seed, "wae-states");
        (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn encode_is_deterministic_with_latent_dim_k() {
        let model = small_model(1, 10, 8);
        let s = random_states(2, 1, 10).pop().unwrap();
        let a = model.encode(&s).unwrap();
        let b = model.encode(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 8);
    }

    #[test]
    fn decode_has_observation_dimension_and_is_finite() {
        let model = small_model(3, 12, 4);
        for z in sample_prior(16, 4, &mut stream_rng(4, "ball")) {
            // scale into the unit ball
            let norm: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            let z: Vec<f64> = z.iter().map(|v| v / norm.max(1.0)).collect();
            let out = model.decode(&z).unwrap();
            assert_eq!(out.len(), 12);
            assert!(out.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn zero_prior_weight_reduces_to_reconstruction() {
        let mut model = small_model(5, 6, 3);
        model.prior_weight = 0.0;
        let states = random_states(6, 8, 6);
        let prior = sample_prior(8, 3, &mut stream_rng(7, "prior"));
        let kernel = ResolvedKernel::rbf(1.0);
        let loss = wae_loss(&model, &states, &prior, &kernel).unwrap();
        let mut recon = 0.0;
        for s in &states {
            let z = model.encode(s).unwrap();
            recon += recon_cost(s, &model.decode(&z).unwrap()) / states.len() as f64;
        }
        assert!((loss - recon).abs() < 1e-12);
    }

    #[test]
    fn perfect_autoencoder_leaves_only_the_prior_term() {
        // Identity encoder and decoder with k = obs_dim: zero reconstruction.
        let k = 3;
        let spec = MlpSpec::new(
            vec![k, k],
            HiddenActivation::Tanh,
            OutputActivation::Identity,
        )
        .unwrap();
        let mut enc = MlpParams::zeros(spec.clone());
        enc.weights_mut()[0] = Matrix::eye(k);
        let mut dec = MlpParams::zeros(spec);
        dec.weights_mut()[0] = Matrix::eye(k);
        let model = WaeModel {
            encoder: enc,
            decoder: dec,
            latent_dim: k,
            kernel: KernelSpec::rbf_median(),
            prior_weight: 2.5,
        };
        let states = random_states(8, 6, k);
        let prior = sample_prior(6, k, &mut stream_rng(9, "prior"));
        let kernel = ResolvedKernel::rbf(1.0);
        let loss = wae_loss(&model, &states, &prior, &kernel).unwrap();
        let latents = model.encode_batch(&states).unwrap();
        let want = 2.5 * mmd_resolved(&latents, &prior, &kernel).unwrap();
        assert!((loss - want).abs() < 1e-12);
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let model = small_model(11, 5, 3);
        let states = random_states(12, 6, 5);
        let prior = sample_prior(6, 3, &mut stream_rng(13, "prior"));
        let kernel = ResolvedKernel::rbf(0.8);

        let (_, grads) = wae_loss_grad(&model, &states, &prior, &kernel).unwrap();
        let mut f = |params: &[MlpParams]| {
            let candidate = WaeModel {
                encoder: params[0].clone(),
                decoder: params[1].clone(),
                latent_dim: model.latent_dim,
                kernel: model.kernel.clone(),
                prior_weight: model.prior_weight,
            };
            wae_loss(&candidate, &states, &prior, &kernel).unwrap()
        };
        let err = finite_diff_check_models(
            &mut f,
            &[&model.encoder, &model.decoder],
            &[&grads.encoder, &grads.decoder],
            1e-5,
        )
        .unwrap();
        assert!(err <= 1e-4, "relative error {err}");
    }

    #[test]
    fn adversarial_reg_zero_cases() {
        let model = small_model(15, 5, 3);
        let states = random_states(16, 6, 5);
        assert_eq!(adversarial_reg(&model, &states, &[]).unwrap(), 0.0);
        assert_eq!(adversarial_reg(&model, &[], &states).unwrap(), 0.0);

        let v = adversarial_reg(&model, &states, &states.clone()).unwrap();
        assert!(v <= 1e-12, "identical batches: {v}");

        let mut permuted = states.clone();
        permuted.reverse();
        let v = adversarial_reg(&model, &states, &permuted).unwrap();
        assert!(v <= 1e-12, "permuted batch: {v}");
    }

    #[test]
    fn reconstruction_improves_over_training() {
        // Train briefly on maze-style one-hots; mean reconstruction cost of
        // the last epoch must fall below the first.
        let obs_dim = 25;
        let model_seed = 21;
        let mut model = small_model(model_seed, obs_dim, 4);
        let states: Vec<Vec<f64>> = (0..obs_dim)
            .map(|i| {
                let mut v = vec![0.0; obs_dim];
                v[i] = 1.0;
                v
            })
            .collect();
        let mut rng = stream_rng(22, "train-prior");
        let mut enc_opt = AdamState::new(&model.encoder, AdamHyper::with_lr(1e-2));
        let mut dec_opt = AdamState::new(&model.decoder, AdamHyper::with_lr(1e-2));
        let mut first = None;
        let mut last = 0.0;
        for _ in 0..150 {
            let prior = sample_prior(states.len(), model.latent_dim, &mut rng);
            let latents = model.encode_batch(&states).unwrap();
            let kernel = resolve_batch_kernel(&model, &latents, &prior);
            let (loss, grads) = wae_loss_grad(&model, &states, &prior, &kernel).unwrap();
            crate::numerics::adam_step(&mut model.encoder, &grads.encoder, &mut enc_opt).unwrap();
            crate::numerics::adam_step(&mut model.decoder, &grads.decoder, &mut dec_opt).unwrap();
            first.get_or_insert(loss);
            last = loss;
        }
        assert!(
            last < first.unwrap(),
            "loss did not improve: {} -> {last}",
            first.unwrap()
        );

        // Distinct inputs keep distinct latents after training.
        let latents = model.encode_batch(&states).unwrap();
        let mut min_dist = f64::INFINITY;
        for i in 0..latents.len() {
            for j in (i + 1)..latents.len() {
                let d: f64 = latents[i]
                    .iter()
                    .zip(&latents[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                min_dist = min_dist.min(d.sqrt());
            }
        }
        assert!(min_dist > 0.0, "latents collapsed: min distance {min_dist}");
    }
}
