//! Exact tabular successor representations.
//!
//! For a chain with transition matrix `P` and discount `gamma < 1`, the SR
//! matrix is `M = (I - gamma P)^{-1}`: row `s` holds the discounted
//! expected occupancy of every state starting from `s`. Rows of `P` may sum
//! to less than one, which models episodic termination (the terminated
//! fraction of probability simply stops contributing occupancy).

use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct TabularSr {
    pub n_states: usize,
    /// `m[s][s']` = discounted expected occupancy of `s'` starting from `s`.
    pub m: Matrix,
}

impl TabularSr {
    pub fn zeros(n_states: usize) -> Self {
        TabularSr {
            n_states,
            m: Matrix::zeros(n_states, n_states),
        }
    }

    /// Largest absolute entry difference.
    pub fn linf_distance(&self, other: &TabularSr) -> f64 {
        self.m
            .data()
            .iter()
            .zip(other.m.data())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

/// Solve `(I - gamma P) M = I` by Gaussian elimination with partial
/// pivoting. `P` must be nonnegative with row sums at most one.
pub fn tabular_sr_solve(p: &Matrix, gamma: f64) -> Result<TabularSr> {
    let n = p.rows();
    if p.cols() != n {
        return Err(Error::shape("transition matrix", n, p.cols()));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Config(format!(
            "successor discount must be in [0, 1), got {gamma}"
        )));
    }
    for r in 0..n {
        let row = p.row(r);
        if row.iter().any(|&v| v < 0.0) {
            return Err(Error::Config(format!("negative probability in row {r}")));
        }
        let sum: f64 = row.iter().sum();
        if sum > 1.0 + 1e-9 {
            return Err(Error::Config(format!(
                "row {r} of the transition matrix sums to {sum} > 1"
            )));
        }
    }

    // Augmented system [A | I] with A = I - gamma P.
    let mut a = Matrix::from_fn(n, n, |r, c| {
        let eye = if r == c { 1.0 } else { 0.0 };
        eye - gamma * p.get(r, c)
    });
    let mut inv = Matrix::eye(n);
    for col in 0..n {
        let mut pivot = col;
        for r in (col + 1)..n {
            if a.get(r, col).abs() > a.get(pivot, col).abs() {
                pivot = r;
            }
        }
        if a.get(pivot, col).abs() < 1e-12 {
            return Err(Error::NonFinite("singular system in tabular_sr_solve"));
        }
        if pivot != col {
            for c in 0..n {
                let (x, y) = (a.get(col, c), a.get(pivot, c));
                a.set(col, c, y);
                a.set(pivot, c, x);
                let (x, y) = (inv.get(col, c), inv.get(pivot, c));
                inv.set(col, c, y);
                inv.set(pivot, c, x);
            }
        }
        let diag = a.get(col, col);
        for c in 0..n {
            a.set(col, c, a.get(col, c) / diag);
            inv.set(col, c, inv.get(col, c) / diag);
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a.get(r, col);
            if factor == 0.0 {
                continue;
            }
            for c in 0..n {
                a.set(r, c, a.get(r, c) - factor * a.get(col, c));
                inv.set(r, c, inv.get(r, c) - factor * inv.get(col, c));
            }
        }
    }
    Ok(TabularSr { n_states: n, m: inv })
}

/// Tabular TD estимate of the SR from episodes of state indices:
///
/// `M[s_t, :] += alpha (one_hot(s_t) + gamma M[s_{t+1}, :] - M[s_t, :])`
///
/// applied over consecutive pairs, swept `sweeps` times with a harmonically
/// decaying step size `alpha0 / (1 + sweep / 100)`.
pub fn tabular_sr_td(
    episodes: &[Vec<usize>],
    n_states: usize,
    gamma: f64,
    alpha0: f64,
    sweeps: usize,
) -> TabularSr {
    let mut sr = TabularSr::zeros(n_states);
    let mut next_row = vec![0.0; n_states];
    for sweep in 0..sweeps {
        let alpha = alpha0 / (1.0 + sweep as f64 / 100.0);
        for ep in episodes {
            for w in ep.windows(2) {
                let (s, s_next) = (w[0], w[1]);
                next_row.copy_from_slice(sr.m.row(s_next));
                for c in 0..n_states {
                    let cur = sr.m.get(s, c);
                    let indicator = if c == s { 1.0 } else { 0.0 };
                    sr.m
                        .set(s, c, cur + alpha * (indicator + gamma * next_row[c] - cur));
                }
            }
        }
    }
    sr
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle_matrix(n: usize) -> Matrix {
        Matrix::from_fn(n, n, |r, c| if c == (r + 1) % n { 1.0 } else { 0.0 })
    }

    #[test]
    fn self_loops_give_geometric_series() {
        let sr = tabular_sr_solve(&Matrix::eye(3), 0.9).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { 10.0 } else { 0.0 };
                assert!((sr.m.get(r, c) - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_state_swap_closed_form() {
        // Deterministic swap with gamma = 1/2: diagonal 4/3, off-diagonal 2/3.
        let p = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let sr = tabular_sr_solve(&p, 0.5).unwrap();
        assert!((sr.m.get(0, 0) - 4.0 / 3.0).abs() < 1e-12);
        assert!((sr.m.get(0, 1) - 2.0 / 3.0).abs() < 1e-12);
        assert!((sr.m.get(1, 0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((sr.m.get(1, 1) - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_zero_solve_is_identity() {
        let p = cycle_matrix(4);
        let sr = tabular_sr_solve(&p, 0.0).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(sr.m.get(r, c), if r == c { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn solve_satisfies_the_bellman_identity() {
        // M = I + gamma P M, the defining identity of the SR.
        let p = Matrix::from_rows(&[
            vec![0.1, 0.9, 0.0],
            vec![0.3, 0.3, 0.4],
            vec![0.0, 0.5, 0.5],
        ])
        .unwrap();
        let gamma = 0.95;
        let sr = tabular_sr_solve(&p, gamma).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let mut pm = 0.0;
                for k in 0..3 {
                    pm += p.get(r, k) * sr.m.get(k, c);
                }
                let want = if r == c { 1.0 } else { 0.0 } + gamma * pm;
                assert!(
                    (sr.m.get(r, c) - want).abs() <= 1e-10,
                    "entry ({r}, {c}): {} vs {want}",
                    sr.m.get(r, c)
                );
            }
        }
    }

    #[test]
    fn row_sums_for_absorbing_free_chains() {
        let p = cycle_matrix(5);
        let gamma = 0.8;
        let sr = tabular_sr_solve(&p, gamma).unwrap();
        for r in 0..5 {
            let sum: f64 = (0..5).map(|c| sr.m.get(r, c)).sum();
            assert!((sum - 1.0 / (1.0 - gamma)).abs() < 1e-10);
        }
    }

    #[test]
    fn super_stochastic_rows_are_rejected() {
        let p = Matrix::from_rows(&[vec![0.9, 0.9], vec![0.0, 1.0]]).unwrap();
        assert!(tabular_sr_solve(&p, 0.5).is_err());
    }

    #[test]
    fn single_update_from_zero_is_scaled_indicator() {
        let sr = tabular_sr_td(&[vec![1, 2]], 3, 0.8, 0.25, 1);
        assert_eq!(sr.m.row(1), &[0.0, 0.25, 0.0]);
        assert!(sr.m.row(0).iter().all(|&v| v == 0.0));
        assert!(sr.m.row(2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cycle_td_converges_to_the_linear_solve() {
        // 5-state deterministic cycle, gamma = 0.8, 5000 sweeps of decaying
        // alpha against the matrix-inverse oracle.
        let n = 5;
        let episode: Vec<usize> = (0..=4 * n).map(|i| i % n).collect();
        let td = tabular_sr_td(&[episode], n, 0.8, 0.5, 5000);
        let exact = tabular_sr_solve(&cycle_matrix(n), 0.8).unwrap();
        let dist = td.linf_distance(&exact);
        assert!(dist <= 1e-2, "L-infinity distance {dist}");
    }

    #[test]
    fn gamma_zero_td_converges_to_identity() {
        let episode: Vec<usize> = (0..4).chain(0..4).chain(0..4).collect();
        let td = tabular_sr_td(&[episode], 4, 0.0, 0.5, 2000);
        let eye = TabularSr {
            n_states: 4,
            m: Matrix::eye(4),
        };
        assert!(td.linf_distance(&eye) <= 1e-6);
    }
}
