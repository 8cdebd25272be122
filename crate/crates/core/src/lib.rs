//! Active imitation learning with adversarial query selection.
//!
//! The crate trains an imitation policy against a simulated expert while
//! spending a fixed budget of expert queries as efficiently as possible.
//! Observations are embedded by a Wasserstein autoencoder, a discriminator
//! over (latent, action) pairs supplies the imitation reward and a safety
//! gate for on-policy queries, and a successor-representation model drives
//! core-set selection of off-policy query states. Random and
//! ensemble-uncertainty query baselines share the same training loop.
//!
//! Module map:
//!
//! - [`numerics`]: dense MLPs, explicit backprop, Adam, finite-difference
//!   gradient checking.
//! - [`envs`]: the maze task, the lifted-observation navigation task, and
//!   the simulated expert oracle.
//! - [`representation`]: the autoencoder, kernels, and the MMD two-sample
//!   estimator.
//! - [`adversary`]: the discriminator, the combined adversarial training
//!   objective, and the imitation reward.
//! - [`successor`]: deep successor representation with a target network,
//!   plus tabular solvers used as validation oracles.
//! - [`query`]: safety gate, threshold updates, k-medoid core-set
//!   selection, and the baseline selectors.
//! - [`agent`]: replay buffer, expert dataset, Q policy, and the main
//!   training loop.
//! - [`harness`]: experiment config, seed sweeps, comparison reports, SVG
//!   plots.

pub mod adversary;
pub mod agent;
pub mod checkpoint;
pub mod envs;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod query;
pub mod representation;
pub mod rng;
pub mod successor;

pub use error::{Error, Result};
