//! Central finite-difference gradient checking.
//!
//! These functions are the independent oracle that every analytic gradient
//! in the crate is validated against. They perturb parameters and
//! re-evaluate the loss, so they share no code path with backprop.

use crate::error::Result;
use crate::numerics::{MlpGrads, MlpParams};

/// Worst relative error between `analytic` and central finite differences
/// of `f` at `x0`. The denominator is `max(|analytic|, |numeric|, 1e-8)`.
pub fn finite_diff_check_flat(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    analytic: &[f64],
    h: f64,
) -> f64 {
    assert_eq!(x0.len(), analytic.len());
    assert!(h > 0.0);
    let mut x = x0.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        x[i] = x0[i] + h;
        let fp = f(&x);
        x[i] = x0[i] - h;
        let fm = f(&x);
        x[i] = x0[i];
        let numeric = (fp - fm) / (2.0 * h);
        let denom = analytic[i].abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((analytic[i] - numeric).abs() / denom);
    }
    worst
}

/// Gradient check for a loss over one model's parameters.
pub fn finite_diff_check(
    loss_fn: &mut dyn FnMut(&MlpParams) -> f64,
    params: &MlpParams,
    analytic: &MlpGrads,
    h: f64,
) -> Result<f64> {
    let x0 = params.flatten();
    let ga = analytic.flatten();
    let mut scratch = params.clone();
    let mut f = |x: &[f64]| {
        scratch.set_flat(x).expect("same shape");
        loss_fn(&scratch)
    };
    Ok(finite_diff_check_flat(&mut f, &x0, &ga, h))
}

/// Gradient check for a loss over several models jointly (e.g. encoder,
/// decoder, and discriminator under one combined objective).
pub fn finite_diff_check_models(
    loss_fn: &mut dyn FnMut(&[MlpParams]) -> f64,
    models: &[&MlpParams],
    analytic: &[&MlpGrads],
    h: f64,
) -> Result<f64> {
    assert_eq!(models.len(), analytic.len());
    let mut x0 = Vec::new();
    let mut ga = Vec::new();
    for (m, g) in models.iter().zip(analytic) {
        x0.extend(m.flatten());
        ga.extend(g.flatten());
    }
    let mut scratch: Vec<MlpParams> = models.iter().map(|m| (*m).clone()).collect();
    let sizes: Vec<usize> = models.iter().map(|m| m.n_params()).collect();
    let mut f = |x: &[f64]| {
        let mut off = 0;
        for (s, n) in scratch.iter_mut().zip(&sizes) {
            s.set_flat(&x[off..off + n]).expect("same shape");
            off += n;
        }
        loss_fn(&scratch)
    };
    Ok(finite_diff_check_flat(&mut f, &x0, &ga, h))
}
