//! Simulated tasks and simulated expert oracles.
//!
//! Two environments share one discrete-action interface: the wall maze
//! ([`maze`]) and a lifted-observation navigation task ([`lifted_nav`])
//! whose low-dimensional position is observed through a fixed random
//! smooth embedding. [`oracle::ExpertOracle`] answers optimal-action
//! queries for both and counts every invocation for budget audits.

pub mod lifted_nav;
pub mod maze;
pub mod oracle;

pub use lifted_nav::{LiftedNavEnv, LiftedNavSpec};
pub use maze::{Cell, MazeEnv, MazeObservation, MazeSpec};
pub use oracle::{rollout_expert, ExpertOracle};

use rand_chacha::ChaCha8Rng;

use crate::error::Result;

/// One environment step as stored in the replay buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub next_state: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub expert_intervened: bool,
}

/// Discrete-action environment interface used by the training loop.
pub enum TaskEnv {
    Maze(MazeEnv),
    Lifted(LiftedNavEnv),
}

impl TaskEnv {
    pub fn obs_dim(&self) -> usize {
        match self {
            TaskEnv::Maze(m) => m.obs_dim(),
            TaskEnv::Lifted(l) => l.obs_dim(),
        }
    }

    pub fn n_actions(&self) -> usize {
        match self {
            TaskEnv::Maze(_) => 4,
            TaskEnv::Lifted(l) => l.n_actions(),
        }
    }

    /// Start a new episode from a random start and return its observation.
    pub fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            TaskEnv::Maze(m) => m.reset(rng),
            TaskEnv::Lifted(l) => l.reset(rng),
        }
    }

    pub fn observe(&self) -> Vec<f64> {
        match self {
            TaskEnv::Maze(m) => m.observe(),
            TaskEnv::Lifted(l) => l.observe(),
        }
    }

    /// Apply a discrete action; `done` covers both goal and episode cap.
    pub fn step(&mut self, action: usize) -> Result<(Vec<f64>, f64, bool)> {
        match self {
            TaskEnv::Maze(m) => m.step(action),
            TaskEnv::Lifted(l) => l.step(action),
        }
    }
}
