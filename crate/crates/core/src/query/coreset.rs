//! Core-set selection by k-medoids with L1 distance.
//!
//! Centers are constrained to actual data points because the expert is
//! queried at the selected states: an interpolated center would correspond
//! to no reachable state. Seeding is greedy farthest-point (k-center
//! style); iteration alternates nearest-medoid assignment with an exact
//! medoid update inside each cluster, so the cost never increases.
//!
//! Bit-identical points are grouped and weighted before iterating, which
//! leaves the result unchanged but makes buffers full of repeated states
//! (every visit of a maze cell yields the same vector) cheap to cluster.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Medoids {
    /// Indices of the selected centers in the input slice.
    pub indices: Vec<usize>,
    /// For every input point, the slot in `indices` of its medoid.
    pub assignment: Vec<usize>,
    /// Sum over points of L1 distance to the assigned medoid.
    pub cost: f64,
    /// Cost after seeding and after each improvement round.
    pub cost_history: Vec<f64>,
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

struct Group {
    /// Index of the first occurrence in the original input.
    representative: usize,
    weight: f64,
}

/// Select `n_k` medoids. Deterministic for a fixed seed. If the input has
/// at most `n_k` points, every point is selected.
pub fn coreset_select(points: &[Vec<f64>], n_k: usize, seed: u64) -> Result<Medoids> {
    if n_k == 0 {
        return Err(Error::Config("coreset_select needs n_k >= 1".into()));
    }
    if points.is_empty() {
        return Err(Error::Config("coreset_select needs a non-empty buffer".into()));
    }
    if points.len() <= n_k {
        return Ok(Medoids {
            indices: (0..points.len()).collect(),
            assignment: (0..points.len()).collect(),
            cost: 0.0,
            cost_history: vec![0.0],
        });
    }

    // Group bit-identical points.
    let mut group_of_point = vec![0usize; points.len()];
    let mut groups: Vec<Group> = Vec::new();
    {
        let mut seen: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
        for (i, p) in points.iter().enumerate() {
            let key: Vec<u64> = p.iter().map(|v| v.to_bits()).collect();
            let g = *seen.entry(key).or_insert_with(|| {
                groups.push(Group {
                    representative: i,
                    weight: 0.0,
                });
                groups.len() - 1
            });
            groups[g].weight += 1.0;
            group_of_point[i] = g;
        }
    }
    let u = groups.len();
    let point_of = |g: usize| -> &[f64] { &points[groups[g].representative] };

    if u <= n_k {
        // Fewer distinct points than requested centers: every distinct point
        // becomes a medoid and duplicates keep cost zero.
        let indices: Vec<usize> = groups.iter().map(|g| g.representative).collect();
        let assignment: Vec<usize> = group_of_point.clone();
        return Ok(Medoids {
            indices,
            assignment,
            cost: 0.0,
            cost_history: vec![0.0],
        });
    }

    // Greedy farthest-point seeding over distinct points.
    let mut rng = crate::rng::stream_rng(seed, "coreset-seed");
    let mut medoids: Vec<usize> = vec![rng.gen_range(0..u)];
    let mut nearest = vec![f64::INFINITY; u];
    while medoids.len() < n_k {
        let new = *medoids.last().unwrap();
        for g in 0..u {
            nearest[g] = nearest[g].min(l1(point_of(g), point_of(new)));
        }
        let mut far = 0;
        let mut far_d = f64::NEG_INFINITY;
        for g in 0..u {
            if nearest[g] > far_d {
                far_d = nearest[g];
                far = g;
            }
        }
        medoids.push(far);
    }

    let assign_all = |medoids: &[usize]| -> (Vec<usize>, f64) {
        let mut assignment = vec![0usize; u];
        let mut cost = 0.0;
        for g in 0..u {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (slot, &m) in medoids.iter().enumerate() {
                let d = l1(point_of(g), point_of(m));
                if d < best_d {
                    best_d = d;
                    best = slot;
                }
            }
            assignment[g] = best;
            cost += groups[g].weight * best_d;
        }
        (assignment, cost)
    };

    let (mut assignment, mut cost) = assign_all(&medoids);
    let mut history = vec![cost];
    for _round in 0..100 {
        // Exact medoid update per cluster: the member minimizing the
        // weighted distance sum; the current medoid is always a candidate,
        // so cluster cost cannot increase.
        for slot in 0..n_k {
            let members: Vec<usize> = (0..u).filter(|&g| assignment[g] == slot).collect();
            if members.is_empty() {
                continue;
            }
            let mut best = medoids[slot];
            let mut best_sum = f64::INFINITY;
            for &cand in &members {
                let sum: f64 = members
                    .iter()
                    .map(|&g| groups[g].weight * l1(point_of(g), point_of(cand)))
                    .sum();
                if sum < best_sum {
                    best_sum = sum;
                    best = cand;
                }
            }
            medoids[slot] = best;
        }
        let (new_assignment, new_cost) = assign_all(&medoids);
        assignment = new_assignment;
        history.push(new_cost);
        if new_cost >= cost {
            cost = new_cost;
            break;
        }
        cost = new_cost;
    }

    let indices: Vec<usize> = medoids.iter().map(|&g| groups[g].representative).collect();
    let point_assignment: Vec<usize> = group_of_point
        .iter()
        .map(|&g| assignment[g])
        .collect();
    Ok(Medoids {
        indices,
        assignment: point_assignment,
        cost,
        cost_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn single_medoid_of_three_points_is_the_l1_minimizer() {
        // Points 0, 1, 10 on the line: candidate costs 11, 10, 19.
        let points = vec![vec![0.0], vec![1.0], vec![10.0]];
        let m = coreset_select(&points, 1, 0).unwrap();
        assert_eq!(m.indices, vec![1]);
        assert!((m.cost - 10.0).abs() < 1e-12);
    }

    #[test]
    fn as_many_medoids_as_points_costs_nothing() {
        let points = vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 5.0]];
        let m = coreset_select(&points, 3, 0).unwrap();
        let mut idx = m.indices.clone();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 1, 2]);
        assert_eq!(m.cost, 0.0);
    }

    #[test]
    fn small_buffer_selects_everything() {
        let points = vec![vec![1.0], vec![2.0]];
        let m = coreset_select(&points, 5, 0).unwrap();
        assert_eq!(m.indices, vec![0, 1]);
    }

    #[test]
    fn medoids_are_distinct_actual_points() {
        let mut rng = crate::rng::stream_rng(3, "medoid-pts");
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                (0..4)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect::<Vec<f64>>()
            })
            .collect();
        let m = coreset_select(&points, 5, 1).unwrap();
        let set: std::collections::HashSet<usize> = m.indices.iter().copied().collect();
        assert_eq!(set.len(), 5);
        assert!(m.indices.iter().all(|&i| i < points.len()));
        // cost equals the sum of distances to assigned medoids
        let recomputed: f64 = points
            .iter()
            .zip(&m.assignment)
            .map(|(p, &slot)| l1(p, &points[m.indices[slot]]))
            .sum();
        assert!((recomputed - m.cost).abs() < 1e-9);
    }

    #[test]
    fn cost_history_is_non_increasing() {
        for seed in 0..50 {
            let mut rng = crate::rng::stream_rng(seed, "mono");
            let points: Vec<Vec<f64>> = (0..60)
                .map(|_| {
                    (0..3)
                        .map(|_| StandardNormal.sample(&mut rng))
                        .collect::<Vec<f64>>()
                })
                .collect();
            let m = coreset_select(&points, 4, seed).unwrap();
            for w in m.cost_history.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-12,
                    "seed {seed}: cost went up {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn final_medoids_are_a_fixed_point() {
        let mut rng = crate::rng::stream_rng(11, "fixed-point");
        let points: Vec<Vec<f64>> = (0..50)
            .map(|_| {
                (0..3)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect::<Vec<f64>>()
            })
            .collect();
        let m = coreset_select(&points, 4, 7).unwrap();
        // One more assignment round must not find a cheaper assignment.
        let mut cost = 0.0;
        for p in &points {
            let d = m
                .indices
                .iter()
                .map(|&i| l1(p, &points[i]))
                .fold(f64::INFINITY, f64::min);
            cost += d;
        }
        assert!((cost - m.cost).abs() < 1e-9);
    }

    #[test]
    fn deterministic_for_a_fixed_seed() {
        let mut rng = crate::rng::stream_rng(5, "det");
        let points: Vec<Vec<f64>> = (0..30)
            .map(|_| {
                (0..2)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect::<Vec<f64>>()
            })
            .collect();
        let a = coreset_select(&points, 3, 42).unwrap();
        let b = coreset_select(&points, 3, 42).unwrap();
        assert_eq!(a.indices, b.indices);
        assert_eq!(a.cost, b.cost);
    }

    #[test]
    fn three_separated_clusters_get_one_medoid_each() {
        let centers = [[0.0, 0.0], [20.0, 0.0], [0.0, 20.0]];
        let mut hits = 0;
        for seed in 0..20 {
            let mut rng = crate::rng::stream_rng(seed, "clusters");
            let mut points = Vec::new();
            for c in &centers {
                for _ in 0..20 {
                    let dx: f64 = StandardNormal.sample(&mut rng);
                    let dy: f64 = StandardNormal.sample(&mut rng);
                    points.push(vec![c[0] + dx, c[1] + dy]);
                }
            }
            let m = coreset_select(&points, 3, seed).unwrap();
            let mut cluster_of = |idx: usize| points[idx][1].round() as i64 / 10 * 10
                + points[idx][0].round() as i64 / 10;
            let mut found: Vec<i64> = m.indices.iter().map(|&i| cluster_of(i)).collect();
            found.sort_unstable();
            found.dedup();
            if found.len() == 3 {
                hits += 1;
            }
        }
        assert!(hits >= 19, "cluster recovery in only {hits}/20 seeds");
    }

    #[test]
    fn duplicate_grouping_matches_plain_clustering() {
        // Repeating each point must not change which states are selected.
        let base = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.5],
            vec![10.0, 10.0],
            vec![11.0, 10.5],
        ];
        let mut repeated = Vec::new();
        for p in &base {
            for _ in 0..7 {
                repeated.push(p.clone());
            }
        }
        let m = coreset_select(&repeated, 2, 3).unwrap();
        let selected: std::collections::HashSet<Vec<u64>> = m
            .indices
            .iter()
            .map(|&i| repeated[i].iter().map(|v| v.to_bits()).collect())
            .collect();
        let plain = coreset_select(&base, 2, 3).unwrap();
        let plain_selected: std::collections::HashSet<Vec<u64>> = plain
            .indices
            .iter()
            .map(|&i| base[i].iter().map(|v| v.to_bits()).collect())
            .collect();
        assert_eq!(selected, plain_selected);
    }
}
