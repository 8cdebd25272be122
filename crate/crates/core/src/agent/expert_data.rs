//! The expert dataset: every (state, optimal action) pair the run has paid
//! for, plus the initial demonstration. Exact duplicates are not stored
//! twice; insertion order is kept for reproducible sampling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    Demo,
    OnPolicy,
    OffPolicy,
}

#[derive(Debug, Clone)]
pub struct ExpertDataset {
    states: Vec<Vec<f64>>,
    actions: Vec<usize>,
    sources: Vec<LabelSource>,
    seen_pairs: HashSet<(Vec<u64>, usize)>,
    seen_states: HashSet<Vec<u64>>,
}

fn state_key(state: &[f64]) -> Vec<u64> {
    state.iter().map(|v| v.to_bits()).collect()
}

impl ExpertDataset {
    pub fn new() -> Self {
        ExpertDataset {
            states: Vec::new(),
            actions: Vec::new(),
            sources: Vec::new(),
            seen_pairs: HashSet::new(),
            seen_states: HashSet::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Insert a labeled pair unless the exact (state, action) pair is
    /// already stored. Returns whether it was added.
    pub fn insert(&mut self, state: Vec<f64>, action: usize, source: LabelSource) -> bool {
        let key = (state_key(&state), action);
        if !self.seen_pairs.insert(key) {
            return false;
        }
        self.seen_states.insert(state_key(&state));
        self.states.push(state);
        self.actions.push(action);
        self.sources.push(source);
        true
    }

    /// Whether any action is already labeled for this exact state.
    pub fn contains_state(&self, state: &[f64]) -> bool {
        self.seen_states.contains(&state_key(state))
    }

    pub fn pair(&self, idx: usize) -> (&[f64], usize) {
        (&self.states[idx], self.actions[idx])
    }

    pub fn source(&self, idx: usize) -> LabelSource {
        self.sources[idx]
    }

    /// A batch of `n` pairs: without replacement when the pool is large
    /// enough, with replacement otherwise.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<usize>) {
        if self.is_empty() {
            return (Vec::new(), Vec::new());
        }
        let idx: Vec<usize> = if self.len() >= n {
            let mut all: Vec<usize> = (0..self.len()).collect();
            for i in 0..n {
                let j = rng.gen_range(i..all.len());
                all.swap(i, j);
            }
            all.truncate(n);
            all
        } else {
            (0..n).map(|_| rng.gen_range(0..self.len())).collect()
        };
        (
            idx.iter().map(|&i| self.states[i].clone()).collect(),
            idx.iter().map(|&i| self.actions[i]).collect(),
        )
    }
}

impl Default for ExpertDataset {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn duplicate_pairs_are_not_stored() {
        let mut e = ExpertDataset::new();
        assert!(e.insert(vec![1.0, 0.0], 2, LabelSource::Demo));
        assert!(!e.insert(vec![1.0, 0.0], 2, LabelSource::OnPolicy));
        assert!(e.insert(vec![1.0, 0.0], 3, LabelSource::OnPolicy));
        assert_eq!(e.len(), 2);
        assert!(e.contains_state(&[1.0, 0.0]));
        assert!(!e.contains_state(&[0.0, 1.0]));
    }

    #[test]
    fn small_pool_samples_with_replacement() {
        let mut e = ExpertDataset::new();
        e.insert(vec![1.0], 0, LabelSource::Demo);
        e.insert(vec![2.0], 1, LabelSource::Demo);
        let (states, actions) = e.sample(6, &mut stream_rng(0, "exp"));
        assert_eq!(states.len(), 6);
        assert_eq!(actions.len(), 6);
    }

    #[test]
    fn large_pool_samples_without_replacement() {
        let mut e = ExpertDataset::new();
        for i in 0..10 {
            e.insert(vec![i as f64], 0, LabelSource::OffPolicy);
        }
        let (states, _) = e.sample(10, &mut stream_rng(1, "exp"));
        let mut tags: Vec<i64> = states.iter().map(|s| s[0] as i64).collect();
        tags.sort_unstable();
        assert_eq!(tags, (0..10).collect::<Vec<_>>());
    }
}
