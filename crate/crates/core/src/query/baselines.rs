//! Baseline query selectors: uniform random draws from the replay buffer
//! and epistemic uncertainty from a bootstrapped Q ensemble.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{HiddenActivation, MlpParams, MlpSpec, OutputActivation};

/// Uniform draws of `n` buffer indices without replacement; with
/// replacement when `n` exceeds the buffer size.
pub fn random_select(n_items: usize, n: usize, seed: u64) -> Vec<usize> {
    let mut rng = crate::rng::stream_rng(seed, "random-select");
    if n_items == 0 {
        return Vec::new();
    }
    if n > n_items {
        return (0..n).map(|_| rng.gen_range(0..n_items)).collect();
    }
    // Partial Fisher-Yates: the first n entries of a shuffled index vector.
    let mut idx: Vec<usize> = (0..n_items).collect();
    for i in 0..n {
        let j = rng.gen_range(i..n_items);
        idx.swap(i, j);
    }
    idx.truncate(n);
    idx
}

/// K independently initialized Q heads trained on bootstrap-masked
/// samples; their disagreement proxies epistemic uncertainty.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QEnsemble {
    pub heads: Vec<MlpParams>,
    pub n_actions: usize,
}

impl QEnsemble {
    pub fn new(
        latent_dim: usize,
        n_actions: usize,
        n_heads: usize,
        hidden: &[usize],
        activation: HiddenActivation,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if n_heads < 2 {
            return Err(Error::Config(format!(
                "a bootstrapped ensemble needs at least 2 heads, got {n_heads}"
            )));
        }
        let spec = MlpSpec::with_hidden(
            latent_dim,
            hidden,
            n_actions,
            activation,
            OutputActivation::Identity,
        )?;
        let heads = (0..n_heads)
            .map(|_| MlpParams::init(spec.clone(), rng))
            .collect();
        Ok(QEnsemble { heads, n_actions })
    }

    /// Population standard deviation across heads of `Q(z, action)`.
    pub fn disagreement(&self, z: &[f64], action: usize) -> Result<f64> {
        if action >= self.n_actions {
            return Err(Error::Config(format!(
                "action index {action} out of range for {} actions",
                self.n_actions
            )));
        }
        let k = self.heads.len() as f64;
        let mut mean = 0.0;
        let mut mean_sq = 0.0;
        for head in &self.heads {
            let q = head.forward(z)?[action];
            mean += q / k;
            mean_sq += q * q / k;
        }
        Ok((mean_sq - mean * mean).max(0.0).sqrt())
    }
}

/// Indices of the `n` items with the largest head disagreement at the
/// stored action; ties break toward the newest item (largest index).
pub fn uncertainty_select(
    ensemble: &QEnsemble,
    items: &[(Vec<f64>, usize)],
    n: usize,
) -> Result<Vec<usize>> {
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(items.len());
    for (i, (z, a)) in items.iter().enumerate() {
        scored.push((ensemble.disagreement(z, *a)?, i));
    }
    scored.sort_by(|(sa, ia), (sb, ib)| {
        sb.partial_cmp(sa)
            .expect("finite disagreement")
            .then(ib.cmp(ia))
    });
    Ok(scored.into_iter().take(n).map(|(_, i)| i).collect())
}
