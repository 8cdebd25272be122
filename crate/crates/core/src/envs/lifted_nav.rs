//! Navigation in the unit square observed through a fixed random smooth
//! lifting map. The underlying state is a 2D position; the observation is
//! `sin(W p + b)` for a seeded random affine map into `obs_dim` dimensions.
//! This exercises the full encoder/successor/core-set pipeline on
//! observations that are not trivially decodable.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedNavSpec {
    pub obs_dim: usize,
    /// Displacement length of one step (also the clip norm for continuous
    /// actions).
    pub max_step: f64,
    pub goal: [f64; 2],
    pub goal_radius: f64,
    pub step_reward: f64,
    pub goal_reward: f64,
    pub max_episode_len: usize,
    /// When `false` (the default) actions are 8 compass directions; when
    /// `true` the environment is driven through `step_continuous`.
    pub continuous_actions: bool,
    lift_w: Matrix,
    lift_b: Vec<f64>,
}

pub const COMPASS_ACTIONS: usize = 8;

impl LiftedNavSpec {
    pub fn new(seed: u64, obs_dim: usize) -> Self {
        let mut rng = crate::rng::stream_rng(seed, "lifted-map");
        let lift_w = Matrix::from_fn(obs_dim, 2, |_, _| {
            let g: f64 = StandardNormal.sample(&mut rng);
            2.0 * g
        });
        let lift_b = (0..obs_dim)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        LiftedNavSpec {
            obs_dim,
            max_step: 0.05,
            goal: [0.9, 0.9],
            goal_radius: 0.1,
            step_reward: -1.0,
            goal_reward: 10.0,
            max_episode_len: 100,
            continuous_actions: false,
            lift_w,
            lift_b,
        }
    }

    /// The lifting map: deterministic in the position.
    pub fn observe_pos(&self, p: [f64; 2]) -> Vec<f64> {
        let z = self.lift_w.matvec(&p);
        z.iter()
            .zip(&self.lift_b)
            .map(|(v, b)| (v + b).sin())
            .collect()
    }

    pub fn compass_displacement(&self, action: usize) -> Result<[f64; 2]> {
        if action >= COMPASS_ACTIONS {
            return Err(Error::Config(format!(
                "invalid compass action index {action}"
            )));
        }
        let angle = action as f64 * std::f64::consts::TAU / COMPASS_ACTIONS as f64;
        Ok([self.max_step * angle.cos(), self.max_step * angle.sin()])
    }

    /// Expert controller: displacement straight toward the goal, clipped to
    /// the step norm.
    pub fn expert_displacement(&self, p: [f64; 2]) -> [f64; 2] {
        let dx = self.goal[0] - p[0];
        let dy = self.goal[1] - p[1];
        let norm = (dx * dx + dy * dy).sqrt();
        if norm <= self.max_step || norm == 0.0 {
            [dx, dy]
        } else {
            [dx / norm * self.max_step, dy / norm * self.max_step]
        }
    }

    /// Compass direction closest to the expert displacement.
    pub fn expert_compass_action(&self, p: [f64; 2]) -> usize {
        let d = self.expert_displacement(p);
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for a in 0..COMPASS_ACTIONS {
            let c = self.compass_displacement(a).expect("valid index");
            let dot = c[0] * d[0] + c[1] * d[1];
            if dot > best_dot {
                best_dot = dot;
                best = a;
            }
        }
        best
    }

    pub fn at_goal(&self, p: [f64; 2]) -> bool {
        let dx = p[0] - self.goal[0];
        let dy = p[1] - self.goal[1];
        (dx * dx + dy * dy).sqrt() <= self.goal_radius
    }

    /// Invert the lifting map: coarse grid search refined by Gauss-Newton.
    /// The map is injective for the seeded parameters, so this recovers the
    /// generating position of any genuine observation.
    pub fn decode_observation(&self, obs: &[f64]) -> Result<[f64; 2]> {
        if obs.len() != self.obs_dim {
            return Err(Error::shape("lifted observation", self.obs_dim, obs.len()));
        }
        let sq_err = |p: [f64; 2]| -> f64 {
            self.observe_pos(p)
                .iter()
                .zip(obs)
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        };
        let mut best = [0.5, 0.5];
        let mut best_err = sq_err(best);
        let grid = 50;
        for i in 0..grid {
            for j in 0..grid {
                let p = [i as f64 / (grid - 1) as f64, j as f64 / (grid - 1) as f64];
                let e = sq_err(p);
                if e < best_err {
                    best_err = e;
                    best = p;
                }
            }
        }
        // Gauss-Newton refinement of min_p sum_i (sin(w_i p + b_i) - o_i)^2.
        let mut p = best;
        for _ in 0..25 {
            let mut jtj = [[0.0f64; 2]; 2];
            let mut jtr = [0.0f64; 2];
            for i in 0..self.obs_dim {
                let w = self.lift_w.row(i);
                let z = w[0] * p[0] + w[1] * p[1] + self.lift_b[i];
                let r = z.sin() - obs[i];
                let c = z.cos();
                let j = [c * w[0], c * w[1]];
                jtj[0][0] += j[0] * j[0];
                jtj[0][1] += j[0] * j[1];
                jtj[1][1] += j[1] * j[1];
                jtr[0] += j[0] * r;
                jtr[1] += j[1] * r;
            }
            jtj[1][0] = jtj[0][1];
            let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
            if det.abs() < 1e-12 {
                break;
            }
            let dx = (jtj[1][1] * jtr[0] - jtj[0][1] * jtr[1]) / det;
            let dy = (jtj[0][0] * jtr[1] - jtj[1][0] * jtr[0]) / det;
            p[0] -= dx;
            p[1] -= dy;
            if dx.abs().max(dy.abs()) < 1e-12 {
                break;
            }
        }
        if sq_err(p) > 1e-6 {
            return Err(Error::Oracle(
                "observation does not correspond to a reachable position".into(),
            ));
        }
        Ok(p)
    }
}

/// Stateful episode wrapper around [`LiftedNavSpec`].
pub struct LiftedNavEnv {
    pub spec: LiftedNavSpec,
    pos: [f64; 2],
    steps: usize,
}

impl LiftedNavEnv {
    pub fn new(spec: LiftedNavSpec) -> Self {
        LiftedNavEnv {
            spec,
            pos: [0.1, 0.1],
            steps: 0,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.spec.obs_dim
    }

    pub fn n_actions(&self) -> usize {
        COMPASS_ACTIONS
    }

    pub fn position(&self) -> [f64; 2] {
        self.pos
    }

    /// Uniform start anywhere outside the goal region.
    pub fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        loop {
            let p = [rng.gen::<f64>(), rng.gen::<f64>()];
            if !self.spec.at_goal(p) {
                self.pos = p;
                self.steps = 0;
                return self.observe();
            }
        }
    }

    pub fn reset_to(&mut self, p: [f64; 2]) {
        self.pos = p;
        self.steps = 0;
    }

    pub fn observe(&self) -> Vec<f64> {
        self.spec.observe_pos(self.pos)
    }

    pub fn step(&mut self, action: usize) -> Result<(Vec<f64>, f64, bool)> {
        let d = self.spec.compass_displacement(action)?;
        Ok(self.apply(d))
    }

    /// Continuous-action entry point; the displacement is clipped to the
    /// step norm.
    pub fn step_continuous(&mut self, d: [f64; 2]) -> (Vec<f64>, f64, bool) {
        let norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let d = if norm > self.spec.max_step {
            [
                d[0] / norm * self.spec.max_step,
                d[1] / norm * self.spec.max_step,
            ]
        } else {
            d
        };
        self.apply(d)
    }

    fn apply(&mut self, d: [f64; 2]) -> (Vec<f64>, f64, bool) {
        self.pos = [
            (self.pos[0] + d[0]).clamp(0.0, 1.0),
            (self.pos[1] + d[1]).clamp(0.0, 1.0),
        ];
        self.steps += 1;
        let reached = self.spec.at_goal(self.pos);
        let done = reached || self.steps >= self.spec.max_episode_len;
        let reward = if reached {
            self.spec.goal_reward
        } else {
            self.spec.step_reward
        };
        (self.observe(), reward, done)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observation_is_deterministic_in_position() {
        let spec = LiftedNavSpec::new(3, 32);
        assert_eq!(spec.observe_pos([0.3, 0.7]), spec.observe_pos([0.3, 0.7]));
    }

    #[test]
    fn lifting_map_is_injective_on_a_grid() {
        let spec = LiftedNavSpec::new(3, 32);
        let grid = 50;
        let mut obs = Vec::new();
        for i in 0..grid {
            for j in 0..grid {
                obs.push(spec.observe_pos([
                    i as f64 / (grid - 1) as f64,
                    j as f64 / (grid - 1) as f64,
                ]));
            }
        }
        let mut min_dist = f64::INFINITY;
        for i in 0..obs.len() {
            for j in (i + 1)..obs.len() {
                let d: f64 = obs[i]
                    .iter()
                    .zip(&obs[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                min_dist = min_dist.min(d);
            }
        }
        assert!(min_dist > 0.0, "min pairwise observation distance {min_dist}");
    }

    #[test]
    fn expert_points_at_goal() {
        let spec = LiftedNavSpec::new(3, 32);
        let p = [0.85, 0.82];
        let d = spec.expert_displacement(p);
        let want = (spec.goal[1] - p[1]).atan2(spec.goal[0] - p[0]);
        let got = d[1].atan2(d[0]);
        assert!((want - got).abs() < 1e-6, "angle error {}", (want - got).abs());
    }

    #[test]
    fn decode_recovers_position() {
        let spec = LiftedNavSpec::new(3, 32);
        for p in [[0.05, 0.95], [0.5, 0.5], [0.321, 0.789]] {
            let obs = spec.observe_pos(p);
            let q = spec.decode_observation(&obs).unwrap();
            assert!((p[0] - q[0]).abs() < 1e-8 && (p[1] - q[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn episode_reaches_goal_under_expert() {
        let spec = LiftedNavSpec::new(3, 32);
        let mut env = LiftedNavEnv::new(spec);
        env.reset_to([0.1, 0.1]);
        let mut done = false;
        let mut steps = 0;
        while !done {
            let a = env.spec.expert_compass_action(env.position());
            let (_, _, d) = env.step(a).unwrap();
            done = d;
            steps += 1;
            assert!(steps <= 100);
        }
        assert!(env.spec.at_goal(env.position()));
    }
}
