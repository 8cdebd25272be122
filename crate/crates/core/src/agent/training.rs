//! The full training loop.
//!
//! Per environment step, in order: act; safety-gate check with expert
//! substitution; environment step and buffer insert; policy TD update on
//! the recomputed imitation reward; combined adversary/autoencoder update;
//! successor update; periodic off-policy queries; periodic threshold
//! refresh. A run is strictly single-threaded and bit-reproducible from
//! its seed.


use crate::adversary::{
    adversary_train_step, AdversaryHyper, AdversaryOptimizers, Discriminator,
};
use crate::agent::{
    act, compute_targets, td_loss_grad, ExpertDataset, LabelSource, PolicyBatchItem, PolicyModel,
    QueryBudget, ReplayBuffer,
};
use crate::envs::{
    rollout_expert, ExpertOracle, LiftedNavEnv, LiftedNavSpec, MazeEnv, MazeSpec, TaskEnv,
    Transition,
};
use crate::error::{Error, Result};
use crate::harness::config::{EnvKind, ExperimentConfig};
use crate::numerics::{adam_step, AdamHyper, AdamState, MlpParams};
use crate::query::{
    coreset_select, gate_decision, offpolicy_query, random_select, uncertainty_select,
    GateDecision, QEnsemble, SafetyGate, StrategyKind,
};
use crate::representation::{KernelSpec, WaeModel};
use crate::rng::{indexed_rng, stream_rng};
use crate::successor::{sr_forward, SrBatchItem, SrModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub seed: u64,
    pub step: u64,
    pub episode: u64,
    pub greedy_return: f64,
    pub queries_onpolicy: u64,
    pub queries_offpolicy: u64,
    pub tau: f64,
    pub disc_loss: f64,
    pub wae_loss: f64,
    pub sr_loss: f64,
    pub policy_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    OnPolicy,
    OffPolicy,
    Baseline,
}

impl QueryKind {
    pub fn name(self) -> &'static str {
        match self {
            QueryKind::OnPolicy => "onpolicy",
            QueryKind::OffPolicy => "offpolicy",
            QueryKind::Baseline => "baseline",
        }
    }
}

#[derive(Debug, Clone)]
pub struct QueryEvent {
    pub step: u64,
    pub kind: QueryKind,
    pub state_id: String,
    pub expert_action: usize,
    pub tau_at_query: f64,
}

/// Everything a finished run reports.
pub struct RunResult {
    pub seed: u64,
    pub metrics: Vec<MetricsRow>,
    pub query_log: Vec<QueryEvent>,
    pub queries_used: u64,
    pub denied_interventions: u64,
    /// Steps where the gate was consulted, approved a query, budget
    /// remained, and the policy action still executed. Zero by contract.
    pub gate_violations: u64,
    /// Oracle answers given after initialization (must equal the query-log
    /// length).
    pub oracle_calls_training: u64,
    pub halted_early: bool,
    pub wae: WaeModel,
    pub discriminator: Discriminator,
    pub sr: SrModel,
    pub policy: PolicyModel,
    pub maze_layout: Option<String>,
    /// Mean optimal return over start states (value-iteration oracle).
    pub expert_mean_return: f64,
}

fn epsilon_at(cfg: &ExperimentConfig, step: u64) -> f64 {
    let frac = if cfg.eps_decay_steps == 0 {
        1.0
    } else {
        (step as f64 / cfg.eps_decay_steps as f64).min(1.0)
    };
    cfg.eps_start + (cfg.eps_end - cfg.eps_start) * frac
}

fn kernel_from_config(cfg: &ExperimentConfig) -> KernelSpec {
    use crate::representation::Bandwidth;
    let bandwidth = match cfg.rbf_bandwidth {
        Some(s) => Bandwidth::Fixed(s),
        None => Bandwidth::Median,
    };
    match cfg.kernel.as_str() {
        "rq" => KernelSpec::Rq {
            bandwidth,
            alphas: vec![0.2, 0.5, 1.0, 2.0, 5.0],
        },
        _ => KernelSpec::Rbf { bandwidth },
    }
}

struct Models {
    wae: WaeModel,
    disc: Discriminator,
    sr: SrModel,
    policy: PolicyModel,
    ensemble: Option<QEnsemble>,
}

fn build_models(cfg: &ExperimentConfig, obs_dim: usize, n_actions: usize, seed: u64) -> Result<Models> {
    let wae = WaeModel::new(
        obs_dim,
        cfg.latent_dim,
        &cfg.hidden,
        cfg.hidden_activation,
        kernel_from_config(cfg),
        cfg.prior_weight,
        &mut stream_rng(seed, "init-wae"),
    )?;
    let disc = Discriminator::new(
        cfg.latent_dim,
        n_actions,
        &cfg.hidden,
        cfg.hidden_activation,
        &mut stream_rng(seed, "init-disc"),
    )?;
    let sr = SrModel::new(
        cfg.latent_dim,
        &cfg.hidden,
        cfg.hidden_activation,
        cfg.sr_gamma,
        cfg.sr_sync_period,
        &mut stream_rng(seed, "init-sr"),
    )?;
    let policy = PolicyModel::new(
        cfg.latent_dim,
        n_actions,
        &cfg.hidden,
        cfg.hidden_activation,
        cfg.gamma,
        cfg.entropy_weight,
        &mut stream_rng(seed, "init-policy"),
    )?;
    let ensemble = if cfg.strategy == StrategyKind::Uncertainty {
        Some(QEnsemble::new(
            cfg.latent_dim,
            n_actions,
            cfg.ensemble_heads,
            &cfg.hidden,
            cfg.hidden_activation,
            &mut stream_rng(seed, "init-ensemble"),
        )?)
    } else {
        None
    };
    Ok(Models {
        wae,
        disc,
        sr,
        policy,
        ensemble,
    })
}

/// Mean greedy return. For the maze this is exhaustive over every free
/// non-goal start (greedy policy + deterministic dynamics: a revisited cell
/// is a permanent loop, which scores exactly the episode-cap return).
fn greedy_eval(
    env_kind: EnvKind,
    maze: Option<&MazeSpec>,
    lifted: Option<&LiftedNavSpec>,
    eval_starts: &[[f64; 2]],
    wae: &WaeModel,
    policy: &PolicyModel,
) -> Result<f64> {
    match env_kind {
        EnvKind::Maze => {
            let spec = maze.expect("maze spec");
            let starts = spec.free_cells();
            let mut total = 0.0;
            for &start in &starts {
                let mut env = MazeEnv::new(spec.clone());
                env.reset_to(start);
                let mut visited = vec![false; spec.n_cells()];
                let mut ret = 0.0;
                loop {
                    let idx = spec.cell_index(env.cell());
                    if visited[idx] {
                        ret = -(spec.max_episode_len as f64);
                        break;
                    }
                    visited[idx] = true;
                    let z = wae.encode(&env.observe())?;
                    let a = policy.greedy_action(&z)?;
                    let (_, r, done) = env.step(a)?;
                    ret += r;
                    if done {
                        break;
                    }
                }
                total += ret;
            }
            Ok(total / starts.len() as f64)
        }
        EnvKind::LiftedNav => {
            let spec = lifted.expect("lifted spec");
            let mut total = 0.0;
            for &start in eval_starts {
                let mut env = LiftedNavEnv::new(spec.clone());
                env.reset_to(start);
                let mut ret = 0.0;
                loop {
                    let z = wae.encode(&env.observe())?;
                    let a = policy.greedy_action(&z)?;
                    let (_, r, done) = env.step(a)?;
                    ret += r;
                    if done {
                        break;
                    }
                }
                total += ret;
            }
            Ok(total / eval_starts.len() as f64)
        }
    }
}

/// TD update of one bootstrapped ensemble head on its masked sub-batch.
fn ensemble_head_update(
    head: &mut MlpParams,
    gamma: f64,
    batch: &[PolicyBatchItem],
    rewards: &[f64],
    opt: &mut AdamState,
) -> Result<()> {
    let mut targets = Vec::with_capacity(batch.len());
    for (item, &r) in batch.iter().zip(rewards) {
        let v = if item.done {
            0.0
        } else {
            head.forward(&item.z_next)?
                .iter()
                .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        };
        targets.push(r + gamma * v);
    }
    let (_, grads) = td_loss_grad(head, batch, &targets)?;
    adam_step(head, &grads, opt)?;
    Ok(())
}

struct LoopState {
    env: TaskEnv,
    oracle: ExpertOracle,
    maze_spec: Option<MazeSpec>,
    lifted_spec: Option<LiftedNavSpec>,
    eval_starts: Vec<[f64; 2]>,
    expert_mean_return: f64,
}

fn build_env(cfg: &ExperimentConfig, seed: u64) -> Result<LoopState> {
    match cfg.env_kind {
        EnvKind::Maze => {
            let mut spec =
                MazeSpec::generate(cfg.maze_layout_seed, cfg.maze_wall_fraction, cfg.max_episode_len)?;
            spec.observation = cfg.maze_observation;
            let oracle = ExpertOracle::for_maze(spec.clone());
            let expert_mean_return = spec.expert_mean_return();
            Ok(LoopState {
                env: TaskEnv::Maze(MazeEnv::new(spec.clone())),
                oracle,
                maze_spec: Some(spec),
                lifted_spec: None,
                eval_starts: Vec::new(),
                expert_mean_return,
            })
        }
        EnvKind::LiftedNav => {
            let mut spec = LiftedNavSpec::new(cfg.maze_layout_seed, cfg.lifted_obs_dim);
            spec.max_episode_len = cfg.max_episode_len.min(100);
            let oracle = ExpertOracle::for_lifted(spec.clone());
            // Fixed evaluation starts shared by every eval tick of the run.
            let mut rng = stream_rng(seed, "eval-starts");
            let mut starts = Vec::new();
            {
                let mut env = LiftedNavEnv::new(spec.clone());
                for _ in 0..8 {
                    env.reset(&mut rng);
                    starts.push(env.position());
                }
            }
            let mut expert_total = 0.0;
            for &p in &starts {
                expert_total += oracle.expert_value(&spec.observe_pos(p))?;
            }
            let expert_mean_return = expert_total / starts.len() as f64;
            Ok(LoopState {
                env: TaskEnv::Lifted(LiftedNavEnv::new(spec.clone())),
                oracle,
                maze_spec: None,
                lifted_spec: Some(spec),
                eval_starts: starts,
                expert_mean_return,
            })
        }
    }
}

/// Execute one full training run for `seed`.
pub fn run_training(cfg: &ExperimentConfig, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    let mut state = build_env(cfg, seed)?;
    let obs_dim = state.env.obs_dim();
    let n_actions = state.env.n_actions();
    let mut models = build_models(cfg, obs_dim, n_actions, seed)?;

    let hyper = AdversaryHyper {
        alpha1: cfg.alpha1,
        alpha2: cfg.alpha2,
        contrast_weight: cfg.contrast_weight,
        entropy_weight: cfg.entropy_weight,
        lr: cfg.lr_adversary,
        batch_size: cfg.batch_size,
    };
    let mut adv_opts = AdversaryOptimizers {
        encoder: AdamState::new(&models.wae.encoder, AdamHyper::with_lr(cfg.lr_adversary)),
        decoder: AdamState::new(&models.wae.decoder, AdamHyper::with_lr(cfg.lr_adversary)),
        discriminator: AdamState::new(&models.disc.net, AdamHyper::with_lr(cfg.lr_adversary)),
    };
    let mut policy_opt = AdamState::new(&models.policy.q_net, AdamHyper::with_lr(cfg.lr_policy));
    let mut sr_opt = AdamState::new(&models.sr.net, AdamHyper::with_lr(cfg.lr_sr));
    let mut ensemble_opts: Vec<AdamState> = models
        .ensemble
        .as_ref()
        .map(|e| {
            e.heads
                .iter()
                .map(|h| AdamState::new(h, AdamHyper::with_lr(cfg.lr_policy)))
                .collect()
        })
        .unwrap_or_default();

    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity, cfg.ensemble_heads.min(32));
    let mut expert_data = ExpertDataset::new();
    let mut budget = QueryBudget::new(cfg.budget);
    let mut gate = SafetyGate::new(cfg.alpha, cfg.window);
    let gate_enabled = cfg.gate_enabled();

    // Initial demonstration (free: not counted against the budget).
    if cfg.demo_episodes > 0 {
        let demos = rollout_expert(&state.oracle, cfg.demo_episodes, &mut stream_rng(seed, "demo"))?;
        for t in &demos {
            expert_data.insert(t.state.clone(), t.action, LabelSource::Demo);
        }
    }
    let oracle_calls_baseline = state.oracle.calls();

    let mut rng_env = stream_rng(seed, "env");
    let mut rng_act = stream_rng(seed, "act");
    let mut rng_mask = stream_rng(seed, "mask");
    let mut rng_sample = stream_rng(seed, "sample");
    let mut rng_prior = stream_rng(seed, "prior");

    let mut obs = state.env.reset(&mut rng_env);
    let mut episode: u64 = 0;
    let mut metrics: Vec<MetricsRow> = Vec::new();
    let mut query_log: Vec<QueryEvent> = Vec::new();
    let mut denied: u64 = 0;
    let mut gate_violations: u64 = 0;
    let mut last_onpolicy_step: u64 = 0;
    let mut last_disc_loss = 0.0;
    let mut last_wae_loss = 0.0;
    let mut last_sr_loss = 0.0;
    let mut last_policy_loss = 0.0;
    let mut halted_early = false;

    let mut t: u64 = 0;
    while t < cfg.total_steps {
        t += 1;

        // Act (policy proposal) and gate check.
        let z = models.wae.encode(&obs)?;
        let proposed = act(&models.policy, &z, epsilon_at(cfg, t), &mut rng_act)?;
        let gate_score = crate::adversary::score(&models.disc, &z, proposed)?;
        gate.record_score(gate_score);

        let mut executed = proposed;
        let mut intervened = false;
        let cooled_down = t.saturating_sub(last_onpolicy_step) >= cfg.onpolicy_min_gap;
        if gate_enabled && cooled_down {
            if gate_decision(&gate, gate_score) == GateDecision::QueryExpert {
                let had_budget = !budget.is_exhausted();
                if budget.try_consume() {
                    let expert_action = state.oracle.expert_action(&obs)?;
                    query_log.push(QueryEvent {
                        step: t,
                        kind: QueryKind::OnPolicy,
                        state_id: state.oracle.state_id(&obs),
                        expert_action,
                        tau_at_query: gate.tau,
                    });
                    if cfg.store_onpolicy_in_expert {
                        expert_data.insert(obs.clone(), expert_action, LabelSource::OnPolicy);
                    }
                    executed = expert_action;
                    intervened = true;
                    last_onpolicy_step = t;
                } else {
                    denied += 1;
                }
                if had_budget && !intervened {
                    gate_violations += 1;
                }
            }
        }

        // Environment step and buffer insert.
        let (next_obs, reward, done) = state.env.step(executed)?;
        buffer.push(
            Transition {
                state: obs.clone(),
                action: executed,
                next_state: next_obs.clone(),
                reward,
                done,
                expert_intervened: intervened,
            },
            t,
            &mut rng_mask,
        );

        let warm = buffer.len() >= cfg.batch_size;

        // Policy update on the recomputed imitation reward.
        if warm && t % cfg.policy_every == 0 {
            let idx = buffer.sample_indices(cfg.batch_size, &mut rng_sample);
            let mut batch = Vec::with_capacity(idx.len());
            for &i in &idx {
                let e = buffer.get(i);
                batch.push(PolicyBatchItem {
                    z: models.wae.encode(&e.transition.state)?,
                    action: e.transition.action,
                    z_next: models.wae.encode(&e.transition.next_state)?,
                    done: e.transition.done,
                });
            }
            let disc = &models.disc;
            let reward_fn = |z: &[f64], a: usize| crate::adversary::reward(disc, z, a);
            let mut rewards = Vec::with_capacity(batch.len());
            for item in &batch {
                rewards.push(reward_fn(&item.z, item.action)?);
            }
            let targets = compute_targets(&models.policy, &batch, &rewards)?;
            let (loss, grads) = td_loss_grad(&models.policy.q_net, &batch, &targets)?;
            adam_step(&mut models.policy.q_net, &grads, &mut policy_opt)?;
            last_policy_loss = loss;

            // Bootstrapped ensemble heads train round-robin on the same
            // reward, each on its masked share of a fresh sample.
            if let Some(ensemble) = models.ensemble.as_mut() {
                let head = (t % ensemble.heads.len() as u64) as usize;
                let idx = buffer.sample_indices(cfg.batch_size, &mut rng_sample);
                let mut masked = Vec::new();
                let mut masked_rewards = Vec::new();
                for &i in &idx {
                    let e = buffer.get(i);
                    if e.bootstrap_mask & (1 << head) == 0 {
                        continue;
                    }
                    let item = PolicyBatchItem {
                        z: models.wae.encode(&e.transition.state)?,
                        action: e.transition.action,
                        z_next: models.wae.encode(&e.transition.next_state)?,
                        done: e.transition.done,
                    };
                    masked_rewards.push(reward_fn(&item.z, item.action)?);
                    masked.push(item);
                }
                if !masked.is_empty() {
                    ensemble_head_update(
                        &mut ensemble.heads[head],
                        cfg.gamma,
                        &masked,
                        &masked_rewards,
                        &mut ensemble_opts[head],
                    )?;
                }
            }
        }

        // Combined adversary / autoencoder update.
        if warm && t % cfg.adversary_every == 0 {
            let idx = buffer.sample_indices(cfg.batch_size, &mut rng_sample);
            let mut ps = Vec::with_capacity(idx.len());
            let mut pa = Vec::with_capacity(idx.len());
            for &i in &idx {
                let e = buffer.get(i);
                ps.push(e.transition.state.clone());
                pa.push(e.transition.action);
            }
            let (es, ea) = expert_data.sample(cfg.batch_size, &mut rng_sample);
            let parts = adversary_train_step(
                &mut models.disc,
                &mut models.wae,
                (&ps, &pa),
                (&es, &ea),
                &hyper,
                &mut adv_opts,
                &mut rng_prior,
            )?;
            last_disc_loss = parts.classification;
            last_wae_loss = parts.wae_policy;
        }

        // Successor update on detached latents.
        if warm && t % cfg.sr_every == 0 {
            let idx = buffer.sample_indices(cfg.batch_size, &mut rng_sample);
            let mut batch = Vec::with_capacity(idx.len());
            for &i in &idx {
                let e = buffer.get(i);
                batch.push(SrBatchItem {
                    z: models.wae.encode(&e.transition.state)?,
                    z_next: models.wae.encode(&e.transition.next_state)?,
                    done: e.transition.done,
                });
            }
            last_sr_loss = models.sr.train_step(&batch, &mut sr_opt)?;
        }

        // Off-policy query tick.
        if t % cfg.t_off == 0 && !budget.is_exhausted() && !buffer.is_empty() {
            let tick = t / cfg.t_off;
            let (selected_states, kind) = match cfg.strategy {
                StrategyKind::CoresetSr => {
                    // Cluster successor vectors of (a capped sample of) the
                    // buffer; duplicates inside coreset_select are free.
                    let mut indices: Vec<usize> = (0..buffer.len()).collect();
                    if buffer.len() > cfg.coreset_sample {
                        let mut rng = indexed_rng(seed, "coreset-sub", tick);
                        for i in 0..cfg.coreset_sample {
                            let j = rand::Rng::gen_range(&mut rng, i..indices.len());
                            indices.swap(i, j);
                        }
                        indices.truncate(cfg.coreset_sample);
                        indices.sort_unstable();
                    }
                    let mut vectors = Vec::with_capacity(indices.len());
                    for &i in &indices {
                        let z = models.wae.encode(&buffer.get(i).transition.state)?;
                        vectors.push(sr_forward(&models.sr, &z)?);
                    }
                    let medoids = coreset_select(&vectors, cfg.n_k, seed ^ tick)?;
                    let states: Vec<Vec<f64>> = medoids
                        .indices
                        .iter()
                        .map(|&v| buffer.get(indices[v]).transition.state.clone())
                        .collect();
                    (states, QueryKind::OffPolicy)
                }
                StrategyKind::Random => {
                    let picks = random_select(buffer.len(), cfg.n_k, seed ^ tick);
                    let states = picks
                        .iter()
                        .map(|&i| buffer.get(i).transition.state.clone())
                        .collect();
                    (states, QueryKind::Baseline)
                }
                StrategyKind::Uncertainty => {
                    let ensemble = models.ensemble.as_ref().expect("uncertainty ensemble");
                    let mut items = Vec::with_capacity(buffer.len());
                    for e in buffer.iter() {
                        items.push((models.wae.encode(&e.transition.state)?, e.transition.action));
                    }
                    let picks = uncertainty_select(ensemble, &items, cfg.n_k)?;
                    let states = picks
                        .iter()
                        .map(|&i| buffer.get(i).transition.state.clone())
                        .collect();
                    (states, QueryKind::Baseline)
                }
            };
            let expert_ref = &expert_data;
            let labeled = |s: &[f64]| expert_ref.contains_state(s);
            let pairs = offpolicy_query(&selected_states, &state.oracle, &mut budget, &labeled)?;
            for (s, a) in pairs {
                query_log.push(QueryEvent {
                    step: t,
                    kind,
                    state_id: state.oracle.state_id(&s),
                    expert_action: a,
                    tau_at_query: gate.tau,
                });
                expert_data.insert(s, a, LabelSource::OffPolicy);
            }
        }

        // Threshold refresh on its own cadence.
        gate.refresh_if_due();

        // Metrics row.
        if t % cfg.metrics_period == 0 || t == cfg.total_steps {
            let greedy_return = greedy_eval(
                cfg.env_kind,
                state.maze_spec.as_ref(),
                state.lifted_spec.as_ref(),
                &state.eval_starts,
                &models.wae,
                &models.policy,
            )?;
            let (q_on, q_off) = count_queries(&query_log);
            metrics.push(MetricsRow {
                seed,
                step: t,
                episode,
                greedy_return,
                queries_onpolicy: q_on,
                queries_offpolicy: q_off,
                tau: gate.tau,
                disc_loss: last_disc_loss,
                wae_loss: last_wae_loss,
                sr_loss: last_sr_loss,
                policy_loss: last_policy_loss,
            });
        }

        // Episode bookkeeping and halting.
        if done {
            episode += 1;
            obs = state.env.reset(&mut rng_env);
            if cfg.stop_on_budget_exhausted && budget.is_exhausted() {
                halted_early = t < cfg.total_steps;
                break;
            }
        } else {
            obs = next_obs;
        }
    }

    // Final row if the loop ended off-cadence.
    if metrics.last().map(|m| m.step) != Some(t) {
        let greedy_return = greedy_eval(
            cfg.env_kind,
            state.maze_spec.as_ref(),
            state.lifted_spec.as_ref(),
            &state.eval_starts,
            &models.wae,
            &models.policy,
        )?;
        let (q_on, q_off) = count_queries(&query_log);
        metrics.push(MetricsRow {
            seed,
            step: t,
            episode,
            greedy_return,
            queries_onpolicy: q_on,
            queries_offpolicy: q_off,
            tau: gate.tau,
            disc_loss: last_disc_loss,
            wae_loss: last_wae_loss,
            sr_loss: last_sr_loss,
            policy_loss: last_policy_loss,
        });
    }

    let oracle_calls_training = state.oracle.calls() - oracle_calls_baseline;
    if budget.used() != query_log.len() as u64 {
        return Err(Error::Config(format!(
            "budget accounting broke: used {} but logged {}",
            budget.used(),
            query_log.len()
        )));
    }
    Ok(RunResult {
        seed,
        metrics,
        query_log,
        queries_used: budget.used(),
        denied_interventions: denied,
        gate_violations,
        oracle_calls_training,
        halted_early,
        wae: models.wae,
        discriminator: models.disc,
        sr: models.sr,
        policy: models.policy,
        maze_layout: state.maze_spec.as_ref().map(MazeSpec::to_text),
        expert_mean_return: state.expert_mean_return,
    })
}

fn count_queries(log: &[QueryEvent]) -> (u64, u64) {
    let on = log
        .iter()
        .filter(|q| q.kind == QueryKind::OnPolicy)
        .count() as u64;
    (on, log.len() as u64 - on)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.total_steps = 400;
        cfg.hidden = vec![16];
        cfg.batch_size = 16;
        cfg.window = 100;
        cfg.t_off = 150;
        cfg.n_k = 3;
        cfg.budget = 20;
        cfg.metrics_period = 200;
        cfg.eps_decay_steps = 200;
        cfg
    }

    #[test]
    fn zero_budget_run_completes_with_no_oracle_calls() {
        let mut cfg = tiny_config();
        cfg.budget = 0;
        cfg.demo_episodes = 1;
        let result = run_training(&cfg, 1).unwrap();
        assert_eq!(result.queries_used, 0);
        assert_eq!(result.oracle_calls_training, 0);
        assert!(result.query_log.is_empty());
        assert_eq!(result.gate_violations, 0);
    }

    #[test]
    fn t_off_beyond_total_steps_gives_no_offpolicy_queries() {
        let mut cfg = tiny_config();
        cfg.t_off = 10_000;
        let result = run_training(&cfg, 2).unwrap();
        assert!(result
            .query_log
            .iter()
            .all(|q| q.kind == QueryKind::OnPolicy));
    }

    #[test]
    fn queries_match_oracle_calls_and_budget() {
        let cfg = tiny_config();
        let result = run_training(&cfg, 3).unwrap();
        assert_eq!(result.queries_used, result.query_log.len() as u64);
        assert_eq!(result.oracle_calls_training, result.queries_used);
        assert!(result.queries_used <= cfg.budget);
    }

    #[test]
    fn early_stop_on_budget_exhaustion() {
        let mut cfg = tiny_config();
        cfg.stop_on_budget_exhausted = true;
        cfg.budget = 3;
        cfg.t_off = 50;
        cfg.n_k = 3;
        let result = run_training(&cfg, 4).unwrap();
        assert!(result.halted_early);
        assert!(result.metrics.last().unwrap().step < cfg.total_steps);
    }

    #[test]
    fn fixed_seed_reproduces_the_run() {
        let cfg = tiny_config();
        let a = run_training(&cfg, 5).unwrap();
        let b = run_training(&cfg, 5).unwrap();
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.query_log.len(), b.query_log.len());
        for (x, y) in a.query_log.iter().zip(&b.query_log) {
            assert_eq!(x.step, y.step);
            assert_eq!(x.state_id, y.state_id);
            assert_eq!(x.expert_action, y.expert_action);
        }
    }

    #[test]
    fn encoder_is_untouched_by_successor_training() {
        // Stop-gradient contract: run with only SR updates enabled.
        let mut cfg = tiny_config();
        cfg.adversary_every = 1_000_000;
        cfg.policy_every = 1_000_000;
        cfg.budget = 0;
        let mut state = build_env(&cfg, 6).unwrap();
        let mut models = build_models(&cfg, state.env.obs_dim(), state.env.n_actions(), 6).unwrap();
        let encoder_before = models.wae.encoder.clone();
        let mut rng_env = stream_rng(6, "env");
        let mut rng_mask = stream_rng(6, "mask");
        let mut rng_sample = stream_rng(6, "sample");
        let mut rng_act = stream_rng(6, "act");
        let mut sr_opt = AdamState::new(&models.sr.net, AdamHyper::with_lr(1e-3));
        let mut obs = state.env.reset(&mut rng_env);
        let mut buffer = ReplayBuffer::new(1000, 1);
        for t in 1..=200u64 {
            let z = models.wae.encode(&obs).unwrap();
            let a = act(&models.policy, &z, 1.0, &mut rng_act).unwrap();
            let (next, r, done) = state.env.step(a).unwrap();
            buffer.push(
                Transition {
                    state: obs.clone(),
                    action: a,
                    next_state: next.clone(),
                    reward: r,
                    done,
                    expert_intervened: false,
                },
                t,
                &mut rng_mask,
            );
            obs = if done { state.env.reset(&mut rng_env) } else { next };
            if buffer.len() >= 16 {
                let idx = buffer.sample_indices(16, &mut rng_sample);
                let batch: Vec<SrBatchItem> = idx
                    .iter()
                    .map(|&i| {
                        let e = buffer.get(i);
                        SrBatchItem {
                            z: models.wae.encode(&e.transition.state).unwrap(),
                            z_next: models.wae.encode(&e.transition.next_state).unwrap(),
                            done: e.transition.done,
                        }
                    })
                    .collect();
                models.sr.train_step(&batch, &mut sr_opt).unwrap();
            }
        }
        assert_eq!(
            models.wae.encoder, encoder_before,
            "successor training must never move encoder parameters"
        );
    }
}
