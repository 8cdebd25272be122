//! The on-policy safety gate.
//!
//! The gate compares a discriminator score against a threshold `tau`:
//! strictly below means the pair looks too unlike the expert data, so the
//! expert should be queried. `tau` starts at zero (no queries) and is
//! periodically reset to a small quantile of the recent score window, so
//! roughly an `alpha` fraction of visited pairs trigger a query.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateDecision {
    FollowPolicy,
    QueryExpert,
}

/// `query_expert` iff `score < tau`; a score exactly at the threshold
/// follows the policy.
pub fn gate_decision(gate: &SafetyGate, score: f64) -> GateDecision {
    if score < gate.tau {
        GateDecision::QueryExpert
    } else {
        GateDecision::FollowPolicy
    }
}

/// The `ceil(alpha * N)`-th smallest score (an order statistic, never an
/// interpolated value). `None` leaves the previous threshold unchanged.
///
/// `alpha * N` arrives through floating point, so products that are exact
/// integers up to rounding (0.2 * 10, 0.05 * 100, ...) are snapped before
/// the ceiling is taken.
pub fn update_threshold(scores: &[f64], alpha: f64) -> Option<f64> {
    if scores.is_empty() {
        return None;
    }
    let n = scores.len();
    let an = alpha * n as f64;
    let k = if (an - an.round()).abs() < 1e-9 {
        an.round() as usize
    } else {
        an.ceil() as usize
    };
    let k = k.clamp(1, n);
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    Some(sorted[k - 1])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SafetyGate {
    pub tau: f64,
    /// Quantile level; small (0.02-0.05) so only clearly off-distribution
    /// pairs query.
    pub alpha: f64,
    /// Steps between threshold refreshes.
    pub update_period: usize,
    window: Vec<f64>,
}

impl SafetyGate {
    pub fn new(alpha: f64, update_period: usize) -> Self {
        SafetyGate {
            tau: 0.0,
            alpha,
            update_period,
            window: Vec::new(),
        }
    }

    /// Record the score of the pair proposed by the policy this step.
    pub fn record_score(&mut self, score: f64) {
        self.window.push(score);
    }

    /// Refresh `tau` from the current window if the period elapsed. Returns
    /// `true` when a refresh happened; the window restarts either way only
    /// on refresh.
    pub fn refresh_if_due(&mut self) -> bool {
        if self.window.len() < self.update_period {
            return false;
        }
        if let Some(tau) = update_threshold(&self.window, self.alpha) {
            self.tau = tau;
        }
        self.window.clear();
        true
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }
}
