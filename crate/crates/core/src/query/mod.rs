//! Query selection: the on-policy safety gate, off-policy core-set
//! selection over successor representations, and the random and
//! ensemble-uncertainty baselines behind one strategy switch.

pub mod baselines;
pub mod coreset;
pub mod gate;
pub mod strategy;

pub use baselines::{random_select, uncertainty_select, QEnsemble};
pub use coreset::{coreset_select, Medoids};
pub use gate::{gate_decision, update_threshold, GateDecision, SafetyGate};
pub use strategy::{offpolicy_query, StrategyKind};
