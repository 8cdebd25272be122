//! The simulated expert.
//!
//! For the maze the oracle precomputes the optimal policy by value
//! iteration; for lifted navigation it decodes the observation and runs a
//! proportional controller toward the goal. Every answered query increments
//! an invocation counter so runs can audit their budget accounting.

use std::cell::Cell as StdCell;

use rand_chacha::ChaCha8Rng;

use crate::envs::{LiftedNavEnv, LiftedNavSpec, MazeEnv, MazeSpec, Transition};
use crate::error::{Error, Result};

pub enum ExpertOracle {
    Maze {
        spec: MazeSpec,
        values: Vec<f64>,
        policy: Vec<Option<usize>>,
        calls: StdCell<u64>,
    },
    Lifted {
        spec: LiftedNavSpec,
        calls: StdCell<u64>,
    },
}

impl ExpertOracle {
    pub fn for_maze(spec: MazeSpec) -> Self {
        let (values, policy) = spec.value_iteration();
        ExpertOracle::Maze {
            spec,
            values,
            policy,
            calls: StdCell::new(0),
        }
    }

    pub fn for_lifted(spec: LiftedNavSpec) -> Self {
        ExpertOracle::Lifted {
            spec,
            calls: StdCell::new(0),
        }
    }

    /// Total number of optimal-action answers given so far.
    pub fn calls(&self) -> u64 {
        match self {
            ExpertOracle::Maze { calls, .. } | ExpertOracle::Lifted { calls, .. } => calls.get(),
        }
    }

    fn bump(&self) {
        match self {
            ExpertOracle::Maze { calls, .. } | ExpertOracle::Lifted { calls, .. } => {
                calls.set(calls.get() + 1)
            }
        }
    }

    /// The optimal action for the state behind `obs`.
    ///
    /// Maze: an action on a shortest path to the goal (value-iteration
    /// argmax, ties broken up < down < left < right). Lifted nav: the
    /// compass direction closest to the straight line toward the goal.
    pub fn expert_action(&self, obs: &[f64]) -> Result<usize> {
        let action = match self {
            ExpertOracle::Maze { spec, policy, .. } => {
                let cell = spec.decode_observation(obs)?;
                if spec.is_wall(cell) {
                    return Err(Error::Oracle(format!(
                        "no expert action for wall cell ({}, {})",
                        cell.x, cell.y
                    )));
                }
                policy[spec.cell_index(cell)].ok_or_else(|| {
                    Error::Oracle(format!(
                        "no expert action for cell ({}, {})",
                        cell.x, cell.y
                    ))
                })?
            }
            ExpertOracle::Lifted { spec, .. } => {
                let p = spec.decode_observation(obs)?;
                spec.expert_compass_action(p)
            }
        };
        self.bump();
        Ok(action)
    }

    /// Optimal expected return from the state behind `obs`.
    pub fn expert_value(&self, obs: &[f64]) -> Result<f64> {
        match self {
            ExpertOracle::Maze { spec, values, .. } => {
                let cell = spec.decode_observation(obs)?;
                Ok(values[spec.cell_index(cell)])
            }
            ExpertOracle::Lifted { spec, .. } => {
                let p = spec.decode_observation(obs)?;
                let dx = spec.goal[0] - p[0];
                let dy = spec.goal[1] - p[1];
                let dist = ((dx * dx + dy * dy).sqrt() - spec.goal_radius).max(0.0);
                let steps = (dist / spec.max_step).ceil();
                Ok(spec.goal_reward + (steps - 1.0).max(0.0) * spec.step_reward)
            }
        }
    }

    /// A short printable identifier for the state, used in query logs.
    pub fn state_id(&self, obs: &[f64]) -> String {
        match self {
            ExpertOracle::Maze { spec, .. } => match spec.decode_observation(obs) {
                Ok(cell) => format!("{}", spec.cell_index(cell)),
                Err(_) => "invalid".into(),
            },
            ExpertOracle::Lifted { .. } => {
                // Positions are continuous; hash the observation bits.
                let mut h: u64 = 0xcbf29ce484222325;
                for v in obs {
                    for b in v.to_bits().to_le_bytes() {
                        h ^= u64::from(b);
                        h = h.wrapping_mul(0x100000001b3);
                    }
                }
                format!("{h:016x}")
            }
        }
    }
}

/// Generate `n_episodes` demonstrations by following the expert from random
/// starts. Every transition is flagged as expert-intervened.
pub fn rollout_expert(
    oracle: &ExpertOracle,
    n_episodes: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Transition>> {
    let mut out = Vec::new();
    for _ in 0..n_episodes {
        match oracle {
            ExpertOracle::Maze { spec, .. } => {
                let mut env = MazeEnv::new(spec.clone());
                let mut obs = env.reset(rng);
                loop {
                    let action = oracle.expert_action(&obs)?;
                    let (next, reward, done) = env.step(action)?;
                    out.push(Transition {
                        state: obs,
                        action,
                        next_state: next.clone(),
                        reward,
                        done,
                        expert_intervened: true,
                    });
                    if done {
                        break;
                    }
                    obs = next;
                }
            }
            ExpertOracle::Lifted { spec, .. } => {
                let mut env = LiftedNavEnv::new(spec.clone());
                let mut obs = env.reset(rng);
                loop {
                    let action = oracle.expert_action(&obs)?;
                    let (next, reward, done) = env.step(action)?;
                    out.push(Transition {
                        state: obs,
                        action,
                        next_state: next.clone(),
                        reward,
                        done,
                        expert_intervened: true,
                    });
                    if done {
                        break;
                    }
                    obs = next;
                }
            }
        }
    }
    Ok(out)
}
