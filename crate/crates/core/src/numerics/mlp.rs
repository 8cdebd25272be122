//! Dense feed-forward network with explicit backprop.
//!
//! Layer `l` computes `a_{l+1} = act(W_l a_l + b_l)`. Hidden layers use one
//! activation, the final layer its own. There is no computation graph: the
//! model zoo is small and fixed, and explicit backprop keeps the
//! finite-difference contract easy to audit.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Sigmoid outputs are clamped to `[SIGMOID_CLIP, 1 - SIGMOID_CLIP]` so that
/// downstream `log` terms stay finite.
pub const SIGMOID_CLIP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HiddenActivation {
    Tanh,
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Identity,
    Sigmoid,
}

/// Architecture description: sizes of every layer plus activations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub hidden: HiddenActivation,
    pub output: OutputActivation,
}

impl MlpSpec {
    pub fn new(
        layer_sizes: Vec<usize>,
        hidden: HiddenActivation,
        output: OutputActivation,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "an MLP needs at least an input and an output size, got {:?}",
                layer_sizes
            )));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Config(format!(
                "all layer sizes must be >= 1, got {:?}",
                layer_sizes
            )));
        }
        Ok(MlpSpec {
            layer_sizes,
            hidden,
            output,
        })
    }

    /// Convenience: `input -> hidden... -> output` sizes from parts.
    pub fn with_hidden(
        input: usize,
        hidden_sizes: &[usize],
        output_size: usize,
        hidden: HiddenActivation,
        output: OutputActivation,
    ) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden_sizes.len() + 2);
        sizes.push(input);
        sizes.extend_from_slice(hidden_sizes);
        sizes.push(output_size);
        MlpSpec::new(sizes, hidden, output)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }
}

/// Weights and biases for one [`MlpSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    spec: MlpSpec,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

/// Per-layer gradient (or moment) buffers, same shapes as [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

/// Activations recorded during a forward pass, consumed by `backward`.
/// Post-activation values suffice: every activation's derivative is
/// recoverable from its output.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `activations[0]` is the input; `activations[l+1]` the output of layer `l`.
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().unwrap()
    }
}

fn apply_hidden(kind: HiddenActivation, z: &mut [f64]) {
    match kind {
        HiddenActivation::Tanh => {
            for v in z {
                *v = v.tanh();
            }
        }
        HiddenActivation::Relu => {
            for v in z {
                *v = v.max(0.0);
            }
        }
    }
}

/// Activation derivative from the stored post-activation value, avoiding a
/// second transcendental evaluation in the backward pass.
fn hidden_deriv_from_activation(kind: HiddenActivation, a: f64) -> f64 {
    match kind {
        HiddenActivation::Tanh => 1.0 - a * a,
        HiddenActivation::Relu => {
            if a > 0.0 {
                1.0
            } else {
                0.0
            }
        }
    }
}

fn apply_output(kind: OutputActivation, z: &mut [f64]) {
    match kind {
        OutputActivation::Identity => {}
        OutputActivation::Sigmoid => {
            for v in z {
                let s = 1.0 / (1.0 + (-*v).exp());
                *v = s.clamp(SIGMOID_CLIP, 1.0 - SIGMOID_CLIP);
            }
        }
    }
}

/// Output derivative from the stored (clamped) output value. The clamp is
/// locally constant, so its derivative is zero where it is active.
fn output_deriv_from_activation(kind: OutputActivation, a: f64) -> f64 {
    match kind {
        OutputActivation::Identity => 1.0,
        OutputActivation::Sigmoid => {
            if a <= SIGMOID_CLIP || a >= 1.0 - SIGMOID_CLIP {
                0.0
            } else {
                a * (1.0 - a)
            }
        }
    }
}

impl MlpParams {
    /// Fresh parameters: weights uniform in `±sqrt(6/(fan_in+fan_out))`,
    /// biases zero.
    pub fn init(spec: MlpSpec, rng: &mut ChaCha8Rng) -> Self {
        let mut weights = Vec::with_capacity(spec.n_layers());
        let mut biases = Vec::with_capacity(spec.n_layers());
        for l in 0..spec.n_layers() {
            let fan_in = spec.layer_sizes[l];
            let fan_out = spec.layer_sizes[l + 1];
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(Matrix::from_fn(fan_out, fan_in, |_, _| {
                rng.gen_range(-limit..limit)
            }));
            biases.push(vec![0.0; fan_out]);
        }
        MlpParams {
            spec,
            weights,
            biases,
        }
    }

    pub fn zeros(spec: MlpSpec) -> Self {
        let weights = (0..spec.n_layers())
            .map(|l| Matrix::zeros(spec.layer_sizes[l + 1], spec.layer_sizes[l]))
            .collect();
        let biases = (0..spec.n_layers())
            .map(|l| vec![0.0; spec.layer_sizes[l + 1]])
            .collect();
        MlpParams {
            spec,
            weights,
            biases,
        }
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.spec.output_dim()
    }

    /// Deterministic forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut cache = self.forward_cache(x)?;
        Ok(cache.activations.pop().expect("non-empty"))
    }

    /// Forward pass keeping everything `backward` needs.
    pub fn forward_cache(&self, x: &[f64]) -> Result<ForwardCache> {
        if x.len() != self.spec.input_dim() {
            return Err(Error::shape(
                "mlp_forward input",
                self.spec.input_dim(),
                x.len(),
            ));
        }
        let n_layers = self.spec.n_layers();
        let mut activations = Vec::with_capacity(n_layers + 1);
        activations.push(x.to_vec());
        for l in 0..n_layers {
            let mut z = self.weights[l].matvec(activations.last().unwrap());
            for (zi, bi) in z.iter_mut().zip(&self.biases[l]) {
                *zi += bi;
            }
            if l + 1 == n_layers {
                apply_output(self.spec.output, &mut z);
            } else {
                apply_hidden(self.spec.hidden, &mut z);
            }
            activations.push(z);
        }
        Ok(ForwardCache { activations })
    }

    /// Backpropagate `upstream` (= dL/d output) through the cached pass.
    ///
    /// Parameter gradients are accumulated into `grads` (so batches sum
    /// naturally); the return value is dL/d input, which is how losses on
    /// encoded latents reach the encoder.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
        grads: &mut MlpGrads,
    ) -> Result<Vec<f64>> {
        Ok(self
            .backward_impl(cache, upstream, grads, true)?
            .expect("input gradient requested"))
    }

    /// Like [`MlpParams::backward`] but skips computing the input gradient,
    /// for callers that only train parameters.
    pub fn backward_params_only(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
        grads: &mut MlpGrads,
    ) -> Result<()> {
        self.backward_impl(cache, upstream, grads, false)?;
        Ok(())
    }

    fn backward_impl(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
        grads: &mut MlpGrads,
        want_input_grad: bool,
    ) -> Result<Option<Vec<f64>>> {
        let n_layers = self.spec.n_layers();
        if upstream.len() != self.spec.output_dim() {
            return Err(Error::shape(
                "mlp_backward upstream",
                self.spec.output_dim(),
                upstream.len(),
            ));
        }
        let mut delta: Vec<f64> = upstream
            .iter()
            .zip(&cache.activations[n_layers])
            .map(|(u, &a)| u * output_deriv_from_activation(self.spec.output, a))
            .collect();
        for l in (0..n_layers).rev() {
            grads.weights[l].add_outer(&delta, &cache.activations[l], 1.0);
            for (g, d) in grads.biases[l].iter_mut().zip(&delta) {
                *g += d;
            }
            if l == 0 {
                return Ok(if want_input_grad {
                    Some(self.weights[0].matvec_transpose(&delta))
                } else {
                    None
                });
            }
            let mut back = self.weights[l].matvec_transpose(&delta);
            for (b, &a) in back.iter_mut().zip(&cache.activations[l]) {
                *b *= hidden_deriv_from_activation(self.spec.hidden, a);
            }
            delta = back;
        }
        unreachable!("n_layers >= 1");
    }

    pub fn zero_grads(&self) -> MlpGrads {
        MlpGrads {
            weights: self
                .weights
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn n_params(&self) -> usize {
        self.weights
            .iter()
            .map(|w| w.data().len())
            .sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// All parameters as one flat vector (weights then bias, layer by layer).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.data());
            out.extend_from_slice(b);
        }
        out
    }

    /// Inverse of [`MlpParams::flatten`].
    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::shape("set_flat", self.n_params(), flat.len()));
        }
        let mut idx = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            let n = w.data().len();
            w.data_mut().copy_from_slice(&flat[idx..idx + n]);
            idx += n;
            let nb = b.len();
            b.copy_from_slice(&flat[idx..idx + nb]);
            idx += nb;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(Matrix::is_finite)
            && self.biases.iter().flatten().all(|v| v.is_finite())
    }
}

impl MlpGrads {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.data());
            out.extend_from_slice(b);
        }
        out
    }

    pub fn scale(&mut self, s: f64) {
        for w in &mut self.weights {
            for v in w.data_mut() {
                *v *= s;
            }
        }
        for b in &mut self.biases {
            for v in b {
                *v *= s;
            }
        }
    }

    pub fn add(&mut self, other: &MlpGrads, scale: f64) {
        for (w, ow) in self.weights.iter_mut().zip(&other.weights) {
            for (v, o) in w.data_mut().iter_mut().zip(ow.data()) {
                *v += scale * o;
            }
        }
        for (b, ob) in self.biases.iter_mut().zip(&other.biases) {
            for (v, o) in b.iter_mut().zip(ob) {
                *v += scale * o;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(Matrix::is_finite)
            && self.biases.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        let w = self
            .weights
            .iter()
            .flat_map(|m| m.data())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        self.biases
            .iter()
            .flatten()
            .fold(w, |m, v| m.max(v.abs()))
    }
}
