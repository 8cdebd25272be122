//! Minimal differentiable MLP core.
//!
//! Every learned model in the crate (encoder, decoder, discriminator,
//! successor net, Q nets) is an [`MlpParams`] built from an [`MlpSpec`],
//! trained by explicit layer-wise backpropagation and [`adam_step`].
//! [`gradcheck`] provides the central-finite-difference oracle that every
//! analytic gradient in the crate is tested against.

mod adam;
pub mod gradcheck;
mod matrix;
mod mlp;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use gradcheck::{finite_diff_check, finite_diff_check_flat, finite_diff_check_models};
pub use matrix::Matrix;
pub use mlp::{
    ForwardCache, HiddenActivation, MlpGrads, MlpParams, MlpSpec, OutputActivation, SIGMOID_CLIP,
};
