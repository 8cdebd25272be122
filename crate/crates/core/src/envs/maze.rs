//! The wall maze: a 10x10 grid, four directional movements, -1 per move,
//! +10 on reaching the goal in the lower-right corner. Moving into a wall
//! cell or off the grid leaves the agent where it was.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Up, down, left, right; ties in the expert policy break in this order.
pub const MAZE_ACTIONS: usize = 4;

const DX: [isize; 4] = [0, 0, -1, 1];
const DY: [isize; 4] = [-1, 1, 0, 0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MazeObservation {
    /// One-hot over all cells (the default).
    OneHot,
    /// `(x, y)` normalized to the unit square.
    Coords,
}

/// Fixed maze layout plus reward constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazeSpec {
    pub width: usize,
    pub height: usize,
    /// `true` marks a wall cell; indexed `y * width + x`.
    walls: Vec<bool>,
    pub goal: Cell,
    pub step_reward: f64,
    pub goal_reward: f64,
    pub max_episode_len: usize,
    pub observation: MazeObservation,
}

impl MazeSpec {
    /// Procedurally generate a layout: wall cells are sampled until every
    /// free cell can reach the goal. The layout depends only on the seed.
    pub fn generate(seed: u64, wall_fraction: f64, max_episode_len: usize) -> Result<Self> {
        let (width, height) = (10, 10);
        let goal = Cell {
            x: width - 1,
            y: height - 1,
        };
        let mut rng = crate::rng::stream_rng(seed, "maze-layout");
        for _attempt in 0..1000 {
            let mut walls = vec![false; width * height];
            for idx in 0..walls.len() {
                let c = Cell {
                    x: idx % width,
                    y: idx / width,
                };
                if c == goal {
                    continue;
                }
                if rng.gen::<f64>() < wall_fraction {
                    walls[idx] = true;
                }
            }
            let spec = MazeSpec {
                width,
                height,
                walls,
                goal,
                step_reward: -1.0,
                goal_reward: 10.0,
                max_episode_len,
                observation: MazeObservation::OneHot,
            };
            if spec.all_free_cells_reach_goal() {
                return Ok(spec);
            }
        }
        Err(Error::Config(format!(
            "could not generate a connected maze layout for seed {seed}"
        )))
    }

    pub fn n_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn cell_index(&self, c: Cell) -> usize {
        c.y * self.width + c.x
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell {
            x: index % self.width,
            y: index / self.width,
        }
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        self.walls[self.cell_index(c)]
    }

    pub fn in_bounds(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// Cells an episode may start from: free and not the goal.
    pub fn free_cells(&self) -> Vec<Cell> {
        (0..self.n_cells())
            .map(|i| self.cell_at(i))
            .filter(|&c| !self.is_wall(c) && c != self.goal)
            .collect()
    }

    fn all_free_cells_reach_goal(&self) -> bool {
        let dist = self.bfs_distances_to_goal();
        (0..self.n_cells()).all(|i| {
            let c = self.cell_at(i);
            self.is_wall(c) || dist[i].is_some()
        })
    }

    /// Shortest-path step counts to the goal (walls get `None`).
    fn bfs_distances_to_goal(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_cells()];
        let goal_idx = self.cell_index(self.goal);
        dist[goal_idx] = Some(0);
        let mut queue = std::collections::VecDeque::from([goal_idx]);
        while let Some(i) = queue.pop_front() {
            let c = self.cell_at(i);
            let d = dist[i].unwrap();
            for a in 0..MAZE_ACTIONS {
                let nx = c.x as isize + DX[a];
                let ny = c.y as isize + DY[a];
                if !self.in_bounds(nx, ny) {
                    continue;
                }
                let n = Cell {
                    x: nx as usize,
                    y: ny as usize,
                };
                let ni = self.cell_index(n);
                if self.walls[ni] || dist[ni].is_some() {
                    continue;
                }
                dist[ni] = Some(d + 1);
                queue.push_back(ni);
            }
        }
        dist
    }

    /// One transition of the maze dynamics. `cell` must be a free non-goal
    /// cell; blocked moves (outer border or wall cell) stay in place.
    pub fn step_cell(&self, cell: Cell, action: usize) -> Result<(Cell, f64, bool)> {
        if action >= MAZE_ACTIONS {
            return Err(Error::Config(format!(
                "invalid maze action index {action}"
            )));
        }
        if self.is_wall(cell) || cell == self.goal {
            return Err(Error::Oracle(format!(
                "maze step from invalid cell ({}, {})",
                cell.x, cell.y
            )));
        }
        let nx = cell.x as isize + DX[action];
        let ny = cell.y as isize + DY[action];
        let next = if self.in_bounds(nx, ny) {
            let n = Cell {
                x: nx as usize,
                y: ny as usize,
            };
            if self.is_wall(n) {
                cell
            } else {
                n
            }
        } else {
            cell
        };
        if next == self.goal {
            Ok((next, self.goal_reward, true))
        } else {
            Ok((next, self.step_reward, false))
        }
    }

    /// Encode a cell under the configured observation scheme.
    pub fn observe_cell(&self, cell: Cell) -> Vec<f64> {
        match self.observation {
            MazeObservation::OneHot => {
                let mut v = vec![0.0; self.n_cells()];
                v[self.cell_index(cell)] = 1.0;
                v
            }
            MazeObservation::Coords => vec![
                cell.x as f64 / (self.width - 1) as f64,
                cell.y as f64 / (self.height - 1) as f64,
            ],
        }
    }

    pub fn obs_dim(&self) -> usize {
        match self.observation {
            MazeObservation::OneHot => self.n_cells(),
            MazeObservation::Coords => 2,
        }
    }

    /// Decode an observation back to a cell.
    pub fn decode_observation(&self, obs: &[f64]) -> Result<Cell> {
        if obs.len() != self.obs_dim() {
            return Err(Error::shape("maze observation", self.obs_dim(), obs.len()));
        }
        let cell = match self.observation {
            MazeObservation::OneHot => {
                let (best, _) = obs
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite obs"))
                    .expect("non-empty obs");
                self.cell_at(best)
            }
            MazeObservation::Coords => Cell {
                x: (obs[0] * (self.width - 1) as f64).round() as usize,
                y: (obs[1] * (self.height - 1) as f64).round() as usize,
            },
        };
        Ok(cell)
    }

    /// Undiscounted value iteration over the maze. Returns per-cell optimal
    /// values (`11 - shortest path steps` under the stated rewards) and the
    /// greedy action per free non-goal cell, ties broken in fixed action
    /// order up < down < left < right.
    pub fn value_iteration(&self) -> (Vec<f64>, Vec<Option<usize>>) {
        let n = self.n_cells();
        let mut values = vec![0.0f64; n];
        for _sweep in 0..10_000 {
            let mut changed = false;
            for i in 0..n {
                let c = self.cell_at(i);
                if self.is_wall(c) || c == self.goal {
                    continue;
                }
                let mut best = f64::NEG_INFINITY;
                for a in 0..MAZE_ACTIONS {
                    let (next, r, done) = self.step_cell(c, a).expect("valid cell");
                    let q = r + if done { 0.0 } else { values[self.cell_index(next)] };
                    if q > best {
                        best = q;
                    }
                }
                if best != values[i] {
                    values[i] = best;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut policy = vec![None; n];
        for i in 0..n {
            let c = self.cell_at(i);
            if self.is_wall(c) || c == self.goal {
                continue;
            }
            let mut best_a = 0;
            let mut best_q = f64::NEG_INFINITY;
            for a in 0..MAZE_ACTIONS {
                let (next, r, done) = self.step_cell(c, a).expect("valid cell");
                let q = r + if done { 0.0 } else { values[self.cell_index(next)] };
                if q > best_q {
                    best_q = q;
                    best_a = a;
                }
            }
            policy[i] = Some(best_a);
        }
        (values, policy)
    }

    /// Mean optimal return over all free non-goal start cells.
    pub fn expert_mean_return(&self) -> f64 {
        let (values, _) = self.value_iteration();
        let starts = self.free_cells();
        starts
            .iter()
            .map(|&c| values[self.cell_index(c)])
            .sum::<f64>()
            / starts.len() as f64
    }

    /// Text layout: one row per line, '.' free, '#' wall, 'G' goal.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let c = Cell { x, y };
                out.push(if c == self.goal {
                    'G'
                } else if self.is_wall(c) {
                    '#'
                } else {
                    '.'
                });
            }
            out.push('\n');
        }
        out
    }

    /// Parse a layout produced by [`MazeSpec::to_text`]; rewards and episode
    /// cap take their defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let height = rows.len();
        if height == 0 {
            return Err(Error::Parse("empty maze layout".into()));
        }
        let width = rows[0].chars().count();
        let mut walls = vec![false; width * height];
        let mut goal = None;
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::Parse(format!(
                    "maze row {y} has wrong width: {row:?}"
                )));
            }
            for (x, ch) in row.chars().enumerate() {
                match ch {
                    '.' => {}
                    '#' => walls[y * width + x] = true,
                    'G' => goal = Some(Cell { x, y }),
                    other => {
                        return Err(Error::Parse(format!(
                            "unexpected maze character {other:?} at ({x}, {y})"
                        )))
                    }
                }
            }
        }
        let goal = goal.ok_or_else(|| Error::Parse("maze layout has no goal cell".into()))?;
        Ok(MazeSpec {
            width,
            height,
            walls,
            goal,
            step_reward: -1.0,
            goal_reward: 10.0,
            max_episode_len: 200,
            observation: MazeObservation::OneHot,
        })
    }

    /// Exposed for tests that need the BFS distances directly.
    pub fn shortest_path_steps(&self) -> Vec<Option<usize>> {
        self.bfs_distances_to_goal()
    }
}

/// Stateful episode wrapper around [`MazeSpec`].
pub struct MazeEnv {
    pub spec: MazeSpec,
    cell: Cell,
    steps: usize,
}

impl MazeEnv {
    pub fn new(spec: MazeSpec) -> Self {
        let start = spec.free_cells()[0];
        MazeEnv {
            spec,
            cell: start,
            steps: 0,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.spec.obs_dim()
    }

    pub fn cell(&self) -> Cell {
        self.cell
    }

    /// Start a new episode from a uniformly random free non-goal cell.
    pub fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let starts = self.spec.free_cells();
        self.cell = starts[rng.gen_range(0..starts.len())];
        self.steps = 0;
        self.observe()
    }

    pub fn reset_to(&mut self, cell: Cell) {
        self.cell = cell;
        self.steps = 0;
    }

    pub fn observe(&self) -> Vec<f64> {
        self.spec.observe_cell(self.cell)
    }

    pub fn step(&mut self, action: usize) -> Result<(Vec<f64>, f64, bool)> {
        let (next, reward, reached_goal) = self.spec.step_cell(self.cell, action)?;
        self.cell = next;
        self.steps += 1;
        let done = reached_goal || self.steps >= self.spec.max_episode_len;
        Ok((self.observe(), reward, done))
    }
}
