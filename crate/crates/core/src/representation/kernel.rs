//! Positive-definite kernels on latent space.
//!
//! Both kernels are functions of the squared distance `u = ||x - y||^2`,
//! equal 1 at `u = 0`, and lie in `(0, 1]`. The rational-quadratic kernel
//! averages a small mixture of shape parameters, which keeps it sensitive
//! across several length scales at once.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Fixed(f64),
    /// Median pairwise distance of the combined batch, recomputed per batch.
    Median,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    Rbf {
        bandwidth: Bandwidth,
    },
    Rq {
        bandwidth: Bandwidth,
        alphas: Vec<f64>,
    },
}

impl KernelSpec {
    pub fn rbf_median() -> Self {
        KernelSpec::Rbf {
            bandwidth: Bandwidth::Median,
        }
    }

    pub fn rq_median() -> Self {
        KernelSpec::Rq {
            bandwidth: Bandwidth::Median,
            alphas: vec![0.2, 0.5, 1.0, 2.0, 5.0],
        }
    }

    /// Pin the bandwidth against a concrete point set. The resolved kernel
    /// is treated as a constant by every gradient in the crate: bandwidth
    /// resolution happens once per batch, before differentiation.
    pub fn resolve(&self, combined: &[&[f64]]) -> ResolvedKernel {
        let sigma = match self.bandwidth() {
            Bandwidth::Fixed(s) => s,
            Bandwidth::Median => median_pairwise_distance(combined).max(1e-6),
        };
        match self {
            KernelSpec::Rbf { .. } => ResolvedKernel {
                sigma,
                alphas: None,
            },
            KernelSpec::Rq { alphas, .. } => ResolvedKernel {
                sigma,
                alphas: Some(alphas.clone()),
            },
        }
    }

    pub fn resolve_fixed(&self, sigma: f64) -> ResolvedKernel {
        match self {
            KernelSpec::Rbf { .. } => ResolvedKernel {
                sigma,
                alphas: None,
            },
            KernelSpec::Rq { alphas, .. } => ResolvedKernel {
                sigma,
                alphas: Some(alphas.clone()),
            },
        }
    }

    fn bandwidth(&self) -> Bandwidth {
        match self {
            KernelSpec::Rbf { bandwidth } | KernelSpec::Rq { bandwidth, .. } => *bandwidth,
        }
    }
}

/// A kernel with its bandwidth pinned to a number.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedKernel {
    pub sigma: f64,
    /// `None` for RBF; `Some(mixture)` for rational quadratic.
    pub alphas: Option<Vec<f64>>,
}

impl ResolvedKernel {
    pub fn rbf(sigma: f64) -> Self {
        ResolvedKernel {
            sigma,
            alphas: None,
        }
    }

    /// Kernel value from the squared distance.
    #[inline]
    pub fn eval(&self, sq_dist: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        match &self.alphas {
            None => (-sq_dist / (2.0 * s2)).exp(),
            Some(alphas) => {
                let mut acc = 0.0;
                for &a in alphas {
                    acc += (1.0 + sq_dist / (2.0 * a * s2)).powf(-a);
                }
                acc / alphas.len() as f64
            }
        }
    }

    /// Derivative of the kernel value with respect to the squared distance.
    #[inline]
    pub fn deriv_sq_dist(&self, sq_dist: f64) -> f64 {
        self.eval_and_deriv(sq_dist).1
    }

    /// Kernel value and its squared-distance derivative, sharing the
    /// transcendental evaluation.
    #[inline]
    pub fn eval_and_deriv(&self, sq_dist: f64) -> (f64, f64) {
        let s2 = self.sigma * self.sigma;
        match &self.alphas {
            None => {
                let k = (-sq_dist / (2.0 * s2)).exp();
                (k, -k / (2.0 * s2))
            }
            Some(alphas) => {
                let mut k = 0.0;
                let mut dk = 0.0;
                for &a in alphas {
                    let base = 1.0 + sq_dist / (2.0 * a * s2);
                    let v = base.powf(-a);
                    k += v;
                    dk += -(v / base) / (2.0 * s2);
                }
                let n = alphas.len() as f64;
                (k / n, dk / n)
            }
        }
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Median of all pairwise distances (not squared). Upper median for even
/// counts, which keeps the statistic a member of the distance set.
pub fn median_pairwise_distance(points: &[&[f64]]) -> f64 {
    let mut dists = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            dists.push(squared_distance(points[i], points[j]).sqrt());
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    let mid = dists.len() / 2;
    let (_, median, _) =
        dists.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).expect("finite distances"));
    *median
}
