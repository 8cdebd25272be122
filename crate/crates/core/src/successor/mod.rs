//! Successor representations: discounted expected future feature
//! occupancy under the behavior policy.
//!
//! [`deep`] holds the TD-trained network over encoder latents with its
//! periodically synced target copy. [`tabular`] holds the exact linear
//! solve and the classic tabular TD recursion, which serve as validation
//! oracles for the deep model.

pub mod deep;
pub mod tabular;

pub use deep::{sr_forward, sr_td_loss, sr_td_loss_grad, SrBatchItem, SrModel};
pub use tabular::{tabular_sr_solve, tabular_sr_td, TabularSr};
