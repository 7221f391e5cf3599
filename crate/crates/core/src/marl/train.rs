use serde::{Deserialize, Serialize};

use super::buffer::{ReplayBuffer, Transition};
use super::env::{CorrectionEnv, MultiAgentEnv, PreliminaryEnv, RewardKind, StateDesign};
use super::maddpg::{AgentSet, LearnerConfig};
use crate::error::{Error, Result};
use crate::fingerprint::DEFAULT_BLOCKS;
use crate::sysmodel::SystemConfig;
use crate::SimRng;

/// Hyperparameters of one training stage.
///
/// Exploration std is in normalised action units (actions live in `[-1, 1]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StageConfig {
    pub gamma: f64,
    pub tau: f64,
    pub noise_start: f64,
    pub noise_end: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub hidden: Vec<usize>,
    /// Updates start once the buffer holds `warmup_batches * batch_size` transitions.
    pub warmup_batches: usize,
    /// Coherence blocks averaged per angular power fingerprint.
    pub fingerprint_blocks: usize,
}

impl Default for StageConfig {
    fn default() -> Self {
        StageConfig {
            gamma: 0.95,
            tau: 0.005,
            noise_start: 0.4,
            noise_end: 0.04,
            batch_size: 128,
            buffer_capacity: 100_000,
            episodes: 500,
            steps_per_episode: 10,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            hidden: vec![64, 64],
            warmup_batches: 10,
            fingerprint_blocks: DEFAULT_BLOCKS,
        }
    }
}

impl StageConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::config("gamma", "must lie in [0, 1)"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::config("tau", "must lie in (0, 1)"));
        }
        if !(self.noise_start >= 0.0 && self.noise_end >= 0.0) {
            return Err(Error::config("noise_start", "exploration std must be non-negative"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be positive"));
        }
        if self.buffer_capacity < self.batch_size {
            return Err(Error::config("buffer_capacity", "must hold at least one batch"));
        }
        if self.steps_per_episode == 0 {
            return Err(Error::config("steps_per_episode", "must be positive"));
        }
        if !(self.actor_lr >= 0.0 && self.critic_lr >= 0.0) {
            return Err(Error::config("actor_lr", "learning rates must be non-negative"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::config("hidden", "layer widths must be positive"));
        }
        if self.fingerprint_blocks == 0 {
            return Err(Error::config("fingerprint_blocks", "must be positive"));
        }
        Ok(())
    }

    /// Linearly annealed exploration std for `episode`.
    pub fn noise_at(&self, episode: usize) -> f64 {
        if self.episodes <= 1 {
            return self.noise_start;
        }
        let f = episode as f64 / (self.episodes - 1) as f64;
        self.noise_start + (self.noise_end - self.noise_start) * f
    }

    pub fn learner(&self) -> LearnerConfig {
        LearnerConfig {
            hidden: self.hidden.clone(),
            actor_lr: self.actor_lr,
            critic_lr: self.critic_lr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    /// RSS-based preliminary positioning.
    Preliminary,
    /// AOA-based angle correction.
    Correction,
}

impl Stage {
    /// Directory name used for checkpoints.
    pub fn dir_name(self) -> &'static str {
        match self {
            Stage::Preliminary => "stage1",
            Stage::Correction => "stage2",
        }
    }
}

/// Per-episode averages over steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub agent_rewards: Vec<f64>,
    pub mean_reward: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub agents: AgentSet,
    pub trace: Vec<EpisodeRecord>,
}

impl TrainOutcome {
    pub fn rewards(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.mean_reward).collect()
    }
}

/// Generic MADDPG loop: new scene per episode, joint exploration, replay,
/// one shared minibatch update per step after warm-up.
pub fn train_env<E: MultiAgentEnv>(env: &mut E, cfg: &StageConfig, rng: &mut SimRng) -> Result<TrainOutcome> {
    cfg.validate()?;
    let m_count = env.num_agents();
    let mut agents = AgentSet::new(m_count, env.state_dim(), env.action_dim(), &cfg.learner(), rng);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let warmup = (cfg.warmup_batches * cfg.batch_size).max(1);
    let mut trace = Vec::with_capacity(cfg.episodes);
    for episode in 0..cfg.episodes {
        let noise = cfg.noise_at(episode);
        let mut states = env.reset(rng)?;
        let mut reward_sum = vec![0.0; m_count];
        let mut rmse_sum = 0.0;
        for _ in 0..cfg.steps_per_episode {
            let actions = agents.explore(&states, noise, rng)?;
            let step = env.step(&actions)?;
            for (acc, r) in reward_sum.iter_mut().zip(&step.rewards) {
                *acc += r;
            }
            rmse_sum += step.rmse;
            buffer.push(Transition {
                states,
                actions,
                rewards: step.rewards,
                next_states: step.next_states.clone(),
            });
            if buffer.len() >= warmup {
                let batch = buffer.sample(cfg.batch_size, rng);
                agents.update(&batch, cfg.gamma, cfg.tau)?;
            }
            states = step.next_states;
        }
        let steps = cfg.steps_per_episode as f64;
        let agent_rewards: Vec<f64> = reward_sum.iter().map(|r| r / steps).collect();
        trace.push(EpisodeRecord {
            episode,
            mean_reward: agent_rewards.iter().sum::<f64>() / m_count as f64,
            agent_rewards,
            rmse: rmse_sum / steps,
        });
    }
    Ok(TrainOutcome { agents, trace })
}

/// Trains one stage of the positioning pipeline. Stage 2 needs the frozen
/// stage-1 agents, whose angle outputs form its observations.
pub fn train_stage(
    system: &SystemConfig,
    cfg: &StageConfig,
    stage: Stage,
    stage1: Option<&AgentSet>,
    rng: &mut SimRng,
) -> Result<TrainOutcome> {
    system.validate()?;
    match stage {
        Stage::Preliminary => {
            let mut env = PreliminaryEnv::stage1(system, cfg.fingerprint_blocks);
            train_env(&mut env, cfg, rng)
        }
        Stage::Correction => {
            let s1 = stage1.ok_or(Error::MissingStageOne)?;
            let mut env = CorrectionEnv::new(system, cfg.fingerprint_blocks, s1, StateDesign::Rss)?;
            train_env(&mut env, cfg, rng)
        }
    }
}

/// Preliminary-positioning training with an alternative observation design.
pub fn train_design(
    system: &SystemConfig,
    cfg: &StageConfig,
    design: StateDesign,
    reward: RewardKind,
    rng: &mut SimRng,
) -> Result<TrainOutcome> {
    system.validate()?;
    let mut env = PreliminaryEnv::new(system, cfg.fingerprint_blocks, design, reward);
    train_env(&mut env, cfg, rng)
}

#[derive(Debug, Clone)]
pub struct TwoStageOutcome {
    pub stage1: TrainOutcome,
    pub stage2: TrainOutcome,
}

pub fn train_two_stage(
    system: &SystemConfig,
    stage1: &StageConfig,
    stage2: &StageConfig,
    rng: &mut SimRng,
) -> Result<TwoStageOutcome> {
    let first = train_stage(system, stage1, Stage::Preliminary, None, rng)?;
    let second = train_stage(system, stage2, Stage::Correction, Some(&first.agents), rng)?;
    Ok(TwoStageOutcome {
        stage1: first,
        stage2: second,
    })
}
