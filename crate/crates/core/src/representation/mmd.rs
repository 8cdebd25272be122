//! Biased (V-statistic) empirical squared MMD between two equal-sized
//! sample sets:
//!
//! `mmd2(X, Y) = mean k(X, X) + mean k(Y, Y) - 2 mean k(X, Y)`
//!
//! The V-statistic includes the diagonal terms, which makes it the squared
//! norm of a kernel mean embedding difference and therefore nonnegative;
//! the small bias is immaterial at the batch sizes used here.

use crate::error::{Error, Result};
use crate::representation::kernel::{squared_distance, KernelSpec, ResolvedKernel};

fn check_sizes(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::shape("mmd sample sizes", x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::Config(format!(
            "mmd needs at least 2 samples per set, got {}",
            x.len()
        )));
    }
    Ok(())
}

/// Lexicographic order on point sets. The estimator is evaluated with its
/// arguments in canonical order so that swapping them gives a bit-identical
/// result (summation order would otherwise differ in the cross term).
fn in_canonical_order(x: &[Vec<f64>], y: &[Vec<f64>]) -> bool {
    for (a, b) in x.iter().zip(y) {
        for (u, v) in a.iter().zip(b) {
            if u < v {
                return true;
            }
            if u > v {
                return false;
            }
        }
    }
    true
}

/// Squared MMD with the kernel bandwidth resolved from the combined batch
/// (for median bandwidths).
pub fn mmd(x: &[Vec<f64>], y: &[Vec<f64>], kernel: &KernelSpec) -> Result<f64> {
    check_sizes(x, y)?;
    let combined: Vec<&[f64]> = x.iter().chain(y.iter()).map(Vec::as_slice).collect();
    mmd_resolved(x, y, &kernel.resolve(&combined))
}

/// Squared MMD under an already-resolved kernel.
pub fn mmd_resolved(x: &[Vec<f64>], y: &[Vec<f64>], kernel: &ResolvedKernel) -> Result<f64> {
    check_sizes(x, y)?;
    let (x, y) = if in_canonical_order(x, y) {
        (x, y)
    } else {
        (y, x)
    };
    let n = x.len() as f64;
    let m = y.len() as f64;
    // Within-set sums use each unordered pair once (k is symmetric); the
    // diagonal contributes k(0) per point.
    let k0 = kernel.eval(0.0);
    let mut kxx = x.len() as f64 * k0;
    for (i, a) in x.iter().enumerate() {
        for b in &x[i + 1..] {
            kxx += 2.0 * kernel.eval(squared_distance(a, b));
        }
    }
    let mut kyy = y.len() as f64 * k0;
    for (i, a) in y.iter().enumerate() {
        for b in &y[i + 1..] {
            kyy += 2.0 * kernel.eval(squared_distance(a, b));
        }
    }
    let mut kxy = 0.0;
    for a in x {
        for b in y {
            kxy += kernel.eval(squared_distance(a, b));
        }
    }
    Ok((kxx / (n * n) + kyy / (m * m) - 2.0 * kxy / (n * m)).max(0.0))
}

/// Squared MMD plus its gradient with respect to every point of both sets.
///
/// With `k(x, y) = g(||x - y||^2)`,
/// `d mmd2 / d x_p = (4/n^2) sum_j g'(u_pj) (x_p - x_j)
///                 - (4/nm)  sum_j g'(||x_p - y_j||^2) (x_p - y_j)`
/// and symmetrically for `y`.
pub fn mmd_grad_resolved(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    kernel: &ResolvedKernel,
) -> Result<(f64, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    check_sizes(x, y)?;
    if !in_canonical_order(x, y) {
        let (value, gy, gx) = mmd_grad_resolved(y, x, kernel)?;
        return Ok((value, gx, gy));
    }
    let n = x.len();
    let m = y.len();
    let dim = x[0].len();
    let nf = n as f64;
    let mf = m as f64;
    let mut gx = vec![vec![0.0; dim]; n];
    let mut gy = vec![vec![0.0; dim]; m];
    let mut value = 0.0;

    // Unordered within-set pairs, visited once; the diagonal contributes
    // k(0) per point and no gradient.
    let k0 = kernel.eval(0.0);
    value += x.len() as f64 * k0 / (nf * nf);
    for p in 0..x.len() {
        for j in (p + 1)..x.len() {
            let u = squared_distance(&x[p], &x[j]);
            let (k, dk) = kernel.eval_and_deriv(u);
            value += 2.0 * k / (nf * nf);
            let c = 4.0 / (nf * nf) * dk;
            for d in 0..dim {
                let g = c * (x[p][d] - x[j][d]);
                gx[p][d] += g;
                gx[j][d] -= g;
            }
        }
    }
    value += y.len() as f64 * k0 / (mf * mf);
    for p in 0..y.len() {
        for j in (p + 1)..y.len() {
            let u = squared_distance(&y[p], &y[j]);
            let (k, dk) = kernel.eval_and_deriv(u);
            value += 2.0 * k / (mf * mf);
            let c = 4.0 / (mf * mf) * dk;
            for d in 0..dim {
                let g = c * (y[p][d] - y[j][d]);
                gy[p][d] += g;
                gy[j][d] -= g;
            }
        }
    }
    for (p, xp) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            let u = squared_distance(xp, yj);
            let (k, dk) = kernel.eval_and_deriv(u);
            value -= 2.0 * k / (nf * mf);
            let c = -4.0 / (nf * mf) * dk;
            for d in 0..dim {
                gx[p][d] += c * (xp[d] - yj[d]);
                gy[j][d] -= c * (xp[d] - yj[d]);
            }
        }
    }
    Ok((value.max(0.0), gx, gy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::finite_diff_check_flat;
    use crate::rng::stream_rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_set(seed: u64, n: usize, dim: usize, mean: f64) -> Vec<Vec<f64>> {
        let mut rng = stream_rng(seed, "mmd-gauss");
        (0..n)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        g + mean
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn identical_sets_give_zero() {
        let x = gaussian_set(1, 16, 4, 0.0);
        let v = mmd(&x, &x.clone(), &KernelSpec::rbf_median()).unwrap();
        assert!(v <= 1e-12, "mmd(X, X) = {v}");
    }

    #[test]
    fn symmetric_in_arguments() {
        let x = gaussian_set(2, 12, 3, 0.0);
        let y = gaussian_set(3, 12, 3, 1.0);
        let k = KernelSpec::rbf_median();
        let combined: Vec<&[f64]> = x.iter().chain(y.iter()).map(Vec::as_slice).collect();
        let rk = k.resolve(&combined);
        let a = mmd_resolved(&x, &y, &rk).unwrap();
        let b = mmd_resolved(&y, &x, &rk).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_point_masses_closed_form() {
        // X = {p, p}, Y = {q, q} at distance r with a fixed RBF bandwidth:
        // mmd2 = 2 - 2 exp(-r^2 / (2 sigma^2)).
        let p = vec![0.0, 0.0];
        let q = vec![3.0, 4.0]; // r = 5
        let x = vec![p.clone(), p];
        let y = vec![q.clone(), q];
        for sigma in [0.5, 1.0, 4.0] {
            let k = ResolvedKernel::rbf(sigma);
            let got = mmd_resolved(&x, &y, &k).unwrap();
            let want = 2.0 - 2.0 * (-25.0 / (2.0 * sigma * sigma)).exp();
            assert!((got - want).abs() <= 1e-10, "sigma {sigma}: {got} vs {want}");
        }
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let x = gaussian_set(4, 8, 2, 0.0);
        let y = gaussian_set(5, 9, 2, 0.0);
        assert!(mmd(&x, &y, &KernelSpec::rbf_median()).is_err());
    }

    #[test]
    fn separated_gaussians_dominate_same_gaussian_pairs() {
        // Monte-Carlo separation: over 20 seeds, mmd2 between N(0,1) and
        // N(5,1) samples must exceed mmd2 between two N(0,1) samples.
        for seed in 0..20 {
            let a = gaussian_set(100 + seed, 256, 1, 0.0);
            let b = gaussian_set(200 + seed, 256, 1, 5.0);
            let c = gaussian_set(300 + seed, 256, 1, 0.0);
            let k = KernelSpec::rbf_median();
            let separated = mmd(&a, &b, &k).unwrap();
            let same = mmd(&a, &c, &k).unwrap();
            assert!(
                separated > same,
                "seed {seed}: separated {separated} <= same {same}"
            );
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for kernel in [KernelSpec::rbf_median(), KernelSpec::rq_median()] {
            let x = gaussian_set(8, 5, 3, 0.0);
            let y = gaussian_set(9, 5, 3, 0.8);
            let rk = kernel.resolve_fixed(1.1);
            let (_, gx, gy) = mmd_grad_resolved(&x, &y, &rk).unwrap();

            let mut flat0: Vec<f64> = Vec::new();
            let mut analytic: Vec<f64> = Vec::new();
            for (p, g) in x.iter().zip(&gx) {
                flat0.extend(p);
                analytic.extend(g);
            }
            for (p, g) in y.iter().zip(&gy) {
                flat0.extend(p);
                analytic.extend(g);
            }
            let dim = 3;
            let mut f = |flat: &[f64]| {
                let xs: Vec<Vec<f64>> = flat[..5 * dim].chunks(dim).map(<[f64]>::to_vec).collect();
                let ys: Vec<Vec<f64>> =
                    flat[5 * dim..].chunks(dim).map(<[f64]>::to_vec).collect();
                mmd_resolved(&xs, &ys, &rk).unwrap()
            };
            let err = finite_diff_check_flat(&mut f, &flat0, &analytic, 1e-6);
            assert!(err <= 1e-6, "relative error {err}");
        }
    }
}
