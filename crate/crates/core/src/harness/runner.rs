//! Seed sweeps: run every configured seed, write its artifacts, and merge
//! the metrics.
//!
//! Each seed run is fully independent, so runs are dispatched to a small
//! worker pool; the files a run writes depend only on (config, seed).

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::agent::{run_training, RunResult};
use crate::checkpoint::{Checkpoint, CHECKPOINT_VERSION};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::csvio::{write_metrics_csv, write_query_log_csv};

/// Where one seed's artifacts were written.
#[derive(Debug, Clone)]
pub struct RunPaths {
    pub seed: u64,
    pub dir: PathBuf,
    pub final_return: f64,
    pub queries_used: u64,
    pub gate_violations: u64,
    pub halted_early: bool,
    pub expert_mean_return: f64,
}

fn write_run(cfg: &ExperimentConfig, result: &RunResult, strategy_dir: &Path) -> Result<RunPaths> {
    let dir = strategy_dir.join(format!("seed_{}", result.seed));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("metrics.csv"), write_metrics_csv(&result.metrics))?;
    std::fs::write(dir.join("queries.csv"), write_query_log_csv(&result.query_log))?;
    std::fs::write(dir.join("config.txt"), cfg.to_text())?;
    if let Some(layout) = &result.maze_layout {
        std::fs::write(dir.join("maze_layout.txt"), layout)?;
    }
    let checkpoint = Checkpoint {
        version: CHECKPOINT_VERSION,
        seed: result.seed,
        config_text: cfg.to_text(),
        maze_layout: result.maze_layout.clone(),
        wae: result.wae.clone(),
        discriminator: result.discriminator.clone(),
        sr: result.sr.clone(),
        policy: result.policy.clone(),
    };
    checkpoint.save(&dir.join("checkpoint.json"))?;
    Ok(RunPaths {
        seed: result.seed,
        dir,
        final_return: result
            .metrics
            .last()
            .map(|m| m.greedy_return)
            .unwrap_or(f64::NAN),
        queries_used: result.queries_used,
        gate_violations: result.gate_violations,
        halted_early: result.halted_early,
        expert_mean_return: result.expert_mean_return,
    })
}

/// Run every seed in the config and write artifacts under
/// `<out_dir>/<strategy>/seed_<n>/`, plus a merged metrics CSV per
/// strategy. Results come back sorted by seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunPaths>> {
    cfg.validate()?;
    let strategy_dir = Path::new(&cfg.out_dir).join(cfg.strategy.name());
    std::fs::create_dir_all(&strategy_dir)?;

    let n_workers = if cfg.workers == 0 {
        std::thread::available_parallelism()
            .map(std::num::NonZeroUsize::get)
            .unwrap_or(1)
            .min(cfg.seeds.len().max(1))
    } else {
        cfg.workers.min(cfg.seeds.len().max(1))
    };

    let seeds = cfg.seeds.clone();
    let next = Mutex::new(0usize);
    let outputs: Mutex<Vec<(u64, RunResult)>> = Mutex::new(Vec::new());
    let failure: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..n_workers {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().expect("scheduler lock");
                    if *guard >= seeds.len() {
                        return;
                    }
                    let i = *guard;
                    *guard += 1;
                    i
                };
                let seed = seeds[idx];
                match run_training(cfg, seed) {
                    Ok(result) => outputs.lock().expect("output lock").push((seed, result)),
                    Err(e) => {
                        *failure.lock().expect("failure lock") = Some(e);
                        return;
                    }
                }
            });
        }
    });

    if let Some(e) = failure.into_inner().expect("failure lock") {
        return Err(e);
    }
    let mut results = outputs.into_inner().expect("output lock");
    results.sort_by_key(|(seed, _)| *seed);

    let mut paths = Vec::new();
    let mut merged_rows = Vec::new();
    for (_, result) in &results {
        merged_rows.extend(result.metrics.iter().copied());
        paths.push(write_run(cfg, result, &strategy_dir)?);
    }
    std::fs::write(
        strategy_dir.join("merged_metrics.csv"),
        write_metrics_csv(&merged_rows),
    )?;
    Ok(paths)
}
