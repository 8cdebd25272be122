//! The learning agent: replay buffer, expert dataset, Q policy, budget
//! accounting, and the full training loop.

mod budget;
mod buffer;
mod expert_data;
mod policy;
pub mod training;

pub use budget::QueryBudget;
pub use buffer::{BufferEntry, ReplayBuffer};
pub use expert_data::{ExpertDataset, LabelSource};
pub use policy::{
    act, compute_targets, policy_update, td_loss, td_loss_grad, PolicyBatchItem, PolicyModel,
};
pub use training::{run_training, MetricsRow, QueryEvent, QueryKind, RunResult};
