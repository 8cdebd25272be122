//! Strategy comparison.
//!
//! Strategies are comparable only when run on the same environment with the
//! same budget and the same seed list. The primary comparison axis is
//! return at matched query spend (the method's whole claim is query
//! efficiency); final returns and pairwise per-seed win counts complete the
//! picture.

use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::csvio::parse_metrics_csv;

/// Everything `compare` needs about one strategy's result directory.
#[derive(Debug, Clone)]
pub struct StrategyResults {
    pub name: String,
    pub env_kind: String,
    pub budget: u64,
    pub seeds: Vec<u64>,
    /// Per seed: final greedy return.
    pub final_returns: Vec<f64>,
    /// Per seed: total queries spent.
    pub queries_used: Vec<u64>,
    /// Per seed: (cumulative queries, greedy return) over the run.
    pub curves: Vec<Vec<(u64, f64)>>,
}

/// Load a strategy directory produced by `run_experiment`
/// (`<out>/<strategy>/seed_*/`).
pub fn load_strategy_dir(dir: &Path) -> Result<StrategyResults> {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "unknown".into());
    let mut seed_dirs: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.is_dir()
                && p.file_name()
                    .map(|n| n.to_string_lossy().starts_with("seed_"))
                    .unwrap_or(false)
        })
        .collect();
    if seed_dirs.is_empty() {
        return Err(Error::Config(format!(
            "no seed_* directories under {}",
            dir.display()
        )));
    }
    seed_dirs.sort();

    let mut env_kind = String::new();
    let mut budget = 0;
    let mut seeds = Vec::new();
    let mut final_returns = Vec::new();
    let mut queries_used = Vec::new();
    let mut curves: Vec<Vec<(u64, f64)>> = Vec::new();
    for (i, sd) in seed_dirs.iter().enumerate() {
        let config_text = std::fs::read_to_string(sd.join("config.txt"))?;
        let cfg = crate::harness::config::ExperimentConfig::parse(&config_text)?;
        let kind = match cfg.env_kind {
            crate::harness::config::EnvKind::Maze => "maze".to_string(),
            crate::harness::config::EnvKind::LiftedNav => "lifted_nav".to_string(),
        };
        if i == 0 {
            env_kind = kind;
            budget = cfg.budget;
        } else if env_kind != kind || budget != cfg.budget {
            return Err(Error::Config(format!(
                "inconsistent env/budget inside {}",
                dir.display()
            )));
        }
        let rows = parse_metrics_csv(&std::fs::read_to_string(sd.join("metrics.csv"))?)?;
        let last = rows
            .last()
            .ok_or_else(|| Error::Config(format!("empty metrics in {}", sd.display())))?;
        seeds.push(last.seed);
        final_returns.push(last.greedy_return);
        queries_used.push(last.queries_onpolicy + last.queries_offpolicy);
        curves.push(
            rows.iter()
                .map(|r| (r.queries_onpolicy + r.queries_offpolicy, r.greedy_return))
                .collect(),
        );
    }
    // Order by seed so strategies align pairwise.
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    order.sort_by_key(|&i| seeds[i]);
    Ok(StrategyResults {
        name,
        env_kind,
        budget,
        seeds: order.iter().map(|&i| seeds[i]).collect(),
        final_returns: order.iter().map(|&i| final_returns[i]).collect(),
        queries_used: order.iter().map(|&i| queries_used[i]).collect(),
        curves: order.iter().map(|&i| curves[i].clone()).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct StrategySummary {
    pub name: String,
    pub mean_final_return: f64,
    pub stderr_final_return: f64,
    pub mean_queries: f64,
    pub per_seed: Vec<(u64, f64, u64)>,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub strategies: Vec<StrategySummary>,
    /// `win_counts[a][b]` = number of seeds where strategy `a`'s final
    /// return strictly beats strategy `b`'s.
    pub win_counts: Vec<Vec<usize>>,
    /// Query-aligned mean return curves: (query count, mean return per
    /// strategy).
    pub query_curves: Vec<(u64, Vec<f64>)>,
    pub seeds: Vec<u64>,
    pub budget: u64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn stderr(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

/// Return level reached having spent at most `q` queries.
fn return_at_query(curve: &[(u64, f64)], q: u64) -> f64 {
    let mut best = curve.first().map(|&(_, r)| r).unwrap_or(f64::NAN);
    for &(spent, ret) in curve {
        if spent <= q {
            best = ret;
        } else {
            break;
        }
    }
    best
}

/// Build the comparison report. Errors unless every strategy ran the same
/// environment, budget, and seed list.
pub fn compare(results: &[StrategyResults]) -> Result<ComparisonReport> {
    if results.len() < 2 {
        return Err(Error::Config("compare needs at least 2 strategies".into()));
    }
    let first = &results[0];
    for r in results {
        if r.seeds != first.seeds {
            return Err(Error::Config(format!(
                "seed lists differ: {} has {:?}, {} has {:?}",
                first.name, first.seeds, r.name, r.seeds
            )));
        }
        if r.budget != first.budget {
            return Err(Error::Config(format!(
                "budgets differ: {} has {}, {} has {}",
                first.name, first.budget, r.name, r.budget
            )));
        }
        if r.env_kind != first.env_kind {
            return Err(Error::Config(format!(
                "environments differ: {} vs {}",
                first.env_kind, r.env_kind
            )));
        }
    }

    let strategies: Vec<StrategySummary> = results
        .iter()
        .map(|r| StrategySummary {
            name: r.name.clone(),
            mean_final_return: mean(&r.final_returns),
            stderr_final_return: stderr(&r.final_returns),
            mean_queries: r.queries_used.iter().sum::<u64>() as f64
                / r.queries_used.len() as f64,
            per_seed: r
                .seeds
                .iter()
                .zip(&r.final_returns)
                .zip(&r.queries_used)
                .map(|((&s, &f), &q)| (s, f, q))
                .collect(),
        })
        .collect();

    let n = results.len();
    let mut win_counts = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            win_counts[a][b] = results[a]
                .final_returns
                .iter()
                .zip(&results[b].final_returns)
                .filter(|(x, y)| x > y)
                .count();
        }
    }

    let budget = first.budget;
    let grid_step = (budget / 50).max(1);
    let mut query_curves = Vec::new();
    let mut q = 0;
    loop {
        let per_strategy: Vec<f64> = results
            .iter()
            .map(|r| mean(&r.curves.iter().map(|c| return_at_query(c, q)).collect::<Vec<_>>()))
            .collect();
        query_curves.push((q, per_strategy));
        if q >= budget {
            break;
        }
        q = (q + grid_step).min(budget);
    }

    Ok(ComparisonReport {
        strategies,
        win_counts,
        query_curves,
        seeds: first.seeds.clone(),
        budget,
    })
}

impl ComparisonReport {
    /// Human-readable table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "comparison over {} seeds, budget {}\n\n",
            self.seeds.len(),
            self.budget
        ));
        out.push_str(&format!(
            "{:<14} {:>14} {:>10} {:>12}\n",
            "strategy", "final return", "stderr", "queries"
        ));
        for s in &self.strategies {
            out.push_str(&format!(
                "{:<14} {:>14.3} {:>10.3} {:>12.1}\n",
                s.name, s.mean_final_return, s.stderr_final_return, s.mean_queries
            ));
        }
        out.push_str("\npairwise wins (row beats column, out of seeds):\n");
        out.push_str(&format!("{:<14}", ""));
        for s in &self.strategies {
            out.push_str(&format!("{:>14}", s.name));
        }
        out.push('\n');
        for (a, s) in self.strategies.iter().enumerate() {
            out.push_str(&format!("{:<14}", s.name));
            for b in 0..self.strategies.len() {
                if a == b {
                    out.push_str(&format!("{:>14}", "-"));
                } else {
                    out.push_str(&format!("{:>14}", self.win_counts[a][b]));
                }
            }
            out.push('\n');
        }
        out
    }

    /// CSV of per-seed final returns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy,seed,final_return,queries_used\n");
        for s in &self.strategies {
            for (seed, ret, q) in &s.per_seed {
                out.push_str(&format!("{},{},{},{}\n", s.name, seed, ret, q));
            }
        }
        out
    }

    /// CSV of the query-aligned mean return curves.
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("queries");
        for s in &self.strategies {
            out.push(',');
            out.push_str(&s.name);
        }
        out.push('\n');
        for (q, row) in &self.query_curves {
            out.push_str(&q.to_string());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}
