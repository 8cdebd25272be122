//! FIFO replay buffer with per-transition bootstrap masks.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::envs::Transition;

#[derive(Debug, Clone)]
pub struct BufferEntry {
    pub transition: Transition,
    /// Bit `k` set means ensemble head `k` trains on this transition.
    pub bootstrap_mask: u32,
    /// Environment step at which the transition was stored.
    pub step: u64,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    entries: VecDeque<BufferEntry>,
    capacity: usize,
    n_masks: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, n_masks: usize) -> Self {
        assert!(n_masks <= 32, "bootstrap masks are stored in a u32");
        ReplayBuffer {
            entries: VecDeque::with_capacity(capacity.min(1 << 16)),
            capacity,
            n_masks,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, idx: usize) -> &BufferEntry {
        &self.entries[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = &BufferEntry> {
        self.entries.iter()
    }

    /// Insert with a fresh Bernoulli(1/2) bootstrap mask; evicts FIFO at
    /// capacity.
    pub fn push(&mut self, transition: Transition, step: u64, rng: &mut ChaCha8Rng) {
        let mut mask = 0u32;
        for k in 0..self.n_masks {
            if rng.gen::<bool>() {
                mask |= 1 << k;
            }
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(BufferEntry {
            transition,
            bootstrap_mask: mask,
            step,
        });
    }

    /// `n` uniform indices with replacement.
    pub fn sample_indices(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        (0..n).map(|_| rng.gen_range(0..self.entries.len())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn transition(tag: f64) -> Transition {
        Transition {
            state: vec![tag],
            action: 0,
            next_state: vec![tag + 0.5],
            reward: -1.0,
            done: false,
            expert_intervened: false,
        }
    }

    #[test]
    fn eviction_is_fifo_and_capacity_holds() {
        let mut buf = ReplayBuffer::new(3, 4);
        let mut rng = stream_rng(0, "buf");
        for i in 0..5 {
            buf.push(transition(i as f64), i, &mut rng);
            assert!(buf.len() <= 3);
        }
        let tags: Vec<f64> = buf.iter().map(|e| e.transition.state[0]).collect();
        assert_eq!(tags, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn masks_cover_all_heads_over_time() {
        let mut buf = ReplayBuffer::new(100, 10);
        let mut rng = stream_rng(1, "buf-mask");
        for i in 0..100 {
            buf.push(transition(i as f64), i, &mut rng);
        }
        let mut union = 0u32;
        for e in buf.iter() {
            union |= e.bootstrap_mask;
        }
        assert_eq!(union, (1 << 10) - 1);
    }
}
