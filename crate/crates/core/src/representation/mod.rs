//! Latent representation learning: deterministic-encoder autoencoder with
//! MMD prior matching, kernels, and the two-sample MMD estimator.

pub mod kernel;
pub mod mmd;
pub mod wae;

pub use kernel::{Bandwidth, KernelSpec, ResolvedKernel};
pub use mmd::{mmd, mmd_grad_resolved, mmd_resolved};
pub use wae::{adversarial_reg, sample_prior, wae_loss, wae_loss_grad, WaeGrads, WaeModel};
