//! Adam optimizer over [`MlpParams`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{MlpGrads, MlpParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamHyper {
    pub fn with_lr(lr: f64) -> Self {
        AdamHyper {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First/second moment accumulators plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: MlpGrads,
    v: MlpGrads,
    step: u64,
    pub hyper: AdamHyper,
}

impl AdamState {
    pub fn new(params: &MlpParams, hyper: AdamHyper) -> Self {
        AdamState {
            m: params.zero_grads(),
            v: params.zero_grads(),
            step: 0,
            hyper,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update. Errors if any gradient entry is non-finite, which is the
/// crate's training-divergence signal.
pub fn adam_step(params: &mut MlpParams, grads: &MlpGrads, state: &mut AdamState) -> Result<()> {
    if !grads.is_finite() {
        return Err(Error::NonFinite("gradient passed to adam_step"));
    }
    state.step += 1;
    let h = state.hyper;
    let bc1 = 1.0 - h.beta1.powi(state.step as i32);
    let bc2 = 1.0 - h.beta2.powi(state.step as i32);

    for l in 0..params.weights_mut().len() {
        {
            let gw = state.m.weights[l].data_mut();
            for (m, g) in gw.iter_mut().zip(grads.weights[l].data()) {
                *m = h.beta1 * *m + (1.0 - h.beta1) * g;
            }
            let vw = state.v.weights[l].data_mut();
            for (v, g) in vw.iter_mut().zip(grads.weights[l].data()) {
                *v = h.beta2 * *v + (1.0 - h.beta2) * g * g;
            }
        }
        let m = state.m.weights[l].data();
        let v = state.v.weights[l].data();
        for (i, p) in params.weights_mut()[l].data_mut().iter_mut().enumerate() {
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            *p -= h.lr * m_hat / (v_hat.sqrt() + h.eps);
        }

        for (m, g) in state.m.biases[l].iter_mut().zip(&grads.biases[l]) {
            *m = h.beta1 * *m + (1.0 - h.beta1) * g;
        }
        for (v, g) in state.v.biases[l].iter_mut().zip(&grads.biases[l]) {
            *v = h.beta2 * *v + (1.0 - h.beta2) * g * g;
        }
        for (i, p) in params.biases_mut()[l].iter_mut().enumerate() {
            let m_hat = state.m.biases[l][i] / bc1;
            let v_hat = state.v.biases[l][i] / bc2;
            *p -= h.lr * m_hat / (v_hat.sqrt() + h.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{HiddenActivation, MlpSpec, OutputActivation};
    use crate::rng::stream_rng;

    fn tiny_net(seed: u64) -> MlpParams {
        let spec = MlpSpec::new(
            vec![2, 3, 1],
            HiddenActivation::Tanh,
            OutputActivation::Identity,
        )
        .unwrap();
        MlpParams::init(spec, &mut stream_rng(seed, "adam-test"))
    }

    #[test]
    fn zero_gradient_is_identity_on_params() {
        let mut p = tiny_net(1);
        let before = p.clone();
        let grads = p.zero_grads();
        let mut st = AdamState::new(&p, AdamHyper::with_lr(0.1));
        for _ in 0..5 {
            adam_step(&mut p, &grads, &mut st).unwrap();
        }
        assert_eq!(p, before);
        assert_eq!(st.step_count(), 5);
    }

    #[test]
    fn constant_gradient_moves_against_its_sign() {
        let spec = MlpSpec::new(
            vec![1, 1],
            HiddenActivation::Tanh,
            OutputActivation::Identity,
        )
        .unwrap();
        let mut p = MlpParams::zeros(spec);
        let mut grads = p.zero_grads();
        grads.weights[0].set(0, 0, 0.7);
        let mut st = AdamState::new(&p, AdamHyper::with_lr(0.01));
        for _ in 0..100 {
            adam_step(&mut p, &grads, &mut st).unwrap();
        }
        assert!(p.flatten()[0] < 0.0, "positive gradient must push the parameter down");
    }

    #[test]
    fn first_step_magnitude_is_about_lr() {
        // With fresh moments and gradient g: m_hat = g, v_hat = g^2, so the
        // update is lr * g / (|g| + eps) ~= lr * sign(g).
        let spec = MlpSpec::new(
            vec![1, 1],
            HiddenActivation::Tanh,
            OutputActivation::Identity,
        )
        .unwrap();
        let mut p = MlpParams::zeros(spec);
        let mut grads = p.zero_grads();
        grads.weights[0].set(0, 0, 3.2);
        let lr = 1e-3;
        let mut st = AdamState::new(&p, AdamHyper::with_lr(lr));
        adam_step(&mut p, &grads, &mut st).unwrap();
        let delta = p.flatten()[0].abs();
        assert!(delta <= lr && delta > 0.999 * lr, "delta {delta} vs lr {lr}");
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let mut p = tiny_net(2);
        let mut grads = p.zero_grads();
        grads.weights[0].set(0, 0, f64::NAN);
        let mut st = AdamState::new(&p, AdamHyper::with_lr(0.01));
        assert!(matches!(
            adam_step(&mut p, &grads, &mut st),
            Err(crate::Error::NonFinite(_))
        ));
    }
}
