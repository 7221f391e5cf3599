//! Per-AP actor-critic agents trained with centralized critics in two stages:
//! RSS-driven preliminary positioning and AOA-driven angle correction.

mod buffer;
pub mod checkpoint;
mod env;
mod evaluate;
mod maddpg;
mod train;

pub use buffer::{Batch, ReplayBuffer, Transition};
pub use env::{
    aoa_state, design_state, fuse_scene, hypotheses, scene_rmse, stage1_reward, stage1_state, stage2_reward,
    stage2_state, ActionBounds, CorrectionEnv, MultiAgentEnv, PreliminaryEnv, RewardKind, RssScale, Scene, StateDesign,
    Step,
};
pub use evaluate::{evaluate, locate_scene, DcpAgents, OracleAgents, Positioner, RandomAgents};
pub use maddpg::{
    action_offset, actor_gradient, critic_target, joint_input, select_action, update_actor, update_critic, AgentSet,
    LearnerConfig, MaddpgAgent, UpdateStats,
};
pub use train::{
    train_design, train_env, train_stage, train_two_stage, EpisodeRecord, Stage, StageConfig, TrainOutcome,
    TwoStageOutcome,
};
