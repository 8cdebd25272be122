//! The strategy switch and the shared off-policy query executor.

use serde::{Deserialize, Serialize};

use crate::agent::QueryBudget;
use crate::envs::ExpertOracle;
use crate::error::Result;

/// Which query-selection machinery a run uses. The safety gate runs only
/// for the core-set strategy unless overridden in config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// K-medoid centers over successor representations plus the on-policy
    /// safety gate.
    CoresetSr,
    /// Uniform random draws from the replay buffer.
    Random,
    /// Largest Q-ensemble disagreement at the stored action.
    Uncertainty,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::CoresetSr => "coreset_sr",
            StrategyKind::Random => "random",
            StrategyKind::Uncertainty => "uncertainty",
        }
    }
}

/// Ask the expert for optimal actions at the selected states.
///
/// States whose exact observation is already labeled are skipped without
/// consuming budget; once the budget runs out the batch is cut short.
/// Returns the fresh (state, action) pairs in selection order.
pub fn offpolicy_query(
    states: &[Vec<f64>],
    oracle: &ExpertOracle,
    budget: &mut QueryBudget,
    already_labeled: &dyn Fn(&[f64]) -> bool,
) -> Result<Vec<(Vec<f64>, usize)>> {
    let mut out = Vec::new();
    for state in states {
        if already_labeled(state) {
            continue;
        }
        if !budget.try_consume() {
            break;
        }
        let action = oracle.expert_action(state)?;
        out.push((state.clone(), action));
    }
    Ok(out)
}
