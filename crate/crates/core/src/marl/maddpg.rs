//! Centralized-critic, decentralized-actor updates.

use ndarray::{s, Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::buffer::Batch;
use crate::approx::{soft_update, Activation, AdamConfig, AgentNet, OptimizerState};
use crate::error::{Error, Result};

/// `clip(actor(state) + N(0, noise_std^2), -1, 1)` per action dimension.
pub fn select_action<R: Rng + ?Sized>(
    actor: &AgentNet,
    state: &[f64],
    noise_std: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut a = actor.forward(state)?;
    if noise_std > 0.0 {
        let normal = Normal::new(0.0, noise_std).map_err(|e| Error::config("noise_std", e.to_string()))?;
        for v in &mut a {
            *v += normal.sample(rng);
        }
    }
    for v in &mut a {
        *v = v.clamp(-1.0, 1.0);
    }
    Ok(a)
}

/// Critic input `[s_1 .. s_M, a_1 .. a_M]`, one row per sample.
pub fn joint_input(states: &[Array2<f64>], actions: &[Array2<f64>]) -> Array2<f64> {
    let rows = states.first().map_or(0, |s| s.nrows());
    let width: usize = states.iter().chain(actions).map(|x| x.ncols()).sum();
    let mut out = Array2::zeros((rows, width));
    let mut col = 0;
    for block in states.iter().chain(actions) {
        out.slice_mut(s![.., col..col + block.ncols()]).assign(block);
        col += block.ncols();
    }
    out
}

/// Column offset of agent `m`'s action inside [`joint_input`].
pub fn action_offset(state_dims: usize, action_dim: usize, m: usize) -> usize {
    state_dims + m * action_dim
}

/// Bellman targets `y_m = r_m + gamma * Q'_m(s', a')` with `a'_j = mu'_j(s'_j)`.
///
/// Returns a `batch x agents` matrix.
pub fn critic_target(
    batch: &Batch,
    target_actors: &[&AgentNet],
    target_critics: &[&AgentNet],
    gamma: f64,
) -> Result<Array2<f64>> {
    let next_actions = target_actors
        .iter()
        .zip(&batch.next_states)
        .map(|(actor, s)| actor.forward_batch(s.view()))
        .collect::<Result<Vec<_>>>()?;
    let input = joint_input(&batch.next_states, &next_actions);
    let mut y = batch.rewards.clone();
    for (m, critic) in target_critics.iter().enumerate() {
        let q = critic.forward_batch(input.view())?;
        let mut col = y.column_mut(m);
        col.zip_mut_with(&q.column(0), |t, &qv| *t += gamma * qv);
    }
    Ok(y)
}

/// One optimizer step on `mean (Q(x) - y)^2`; returns the loss before the step.
pub fn update_critic(
    critic: &mut AgentNet,
    opt: &mut OptimizerState,
    input: ArrayView2<f64>,
    targets: ArrayView2<f64>,
) -> Result<f64> {
    let trace = critic.forward_trace(input)?;
    let n = input.nrows() as f64;
    let diff = &trace.output - &targets;
    let loss = diff.mapv(|d| d * d).sum() / n;
    let upstream = diff.mapv(|d| 2.0 * d / n);
    let (grads, _) = critic.backward_from(&trace, upstream.view())?;
    opt.step(critic, &grads)?;
    Ok(loss)
}

/// Gradient of `-mean_b Q(x_b with agent m's action replaced by mu(s_m,b))`
/// with respect to the actor parameters, and the objective `mean Q`.
pub fn actor_gradient(
    actor: &AgentNet,
    critic: &AgentNet,
    input: ArrayView2<f64>,
    own_states: ArrayView2<f64>,
    offset: usize,
) -> Result<(crate::approx::Gradients, f64)> {
    let actor_trace = actor.forward_trace(own_states)?;
    let width = actor_trace.output.ncols();
    let mut x = input.to_owned();
    x.slice_mut(s![.., offset..offset + width]).assign(&actor_trace.output);
    let critic_trace = critic.forward_trace(x.view())?;
    let n = x.nrows() as f64;
    let objective = critic_trace.output.sum() / n;
    let upstream = Array2::from_elem((x.nrows(), 1), -1.0 / n);
    let (_, dx) = critic.backward_from(&critic_trace, upstream.view())?;
    let da = dx.slice(s![.., offset..offset + width]).to_owned();
    let (grads, _) = actor.backward_from(&actor_trace, da.view())?;
    Ok((grads, objective))
}

/// One ascent step on `mean Q(s, mu(s))`; returns the objective before the step.
pub fn update_actor(
    actor: &mut AgentNet,
    opt: &mut OptimizerState,
    critic: &AgentNet,
    input: ArrayView2<f64>,
    own_states: ArrayView2<f64>,
    offset: usize,
) -> Result<f64> {
    let (grads, objective) = actor_gradient(actor, critic, input, own_states, offset)?;
    opt.step(actor, &grads)?;
    Ok(objective)
}

/// Shrinks the freshly initialised output layers so initial actions sit near
/// the centre of the action box and initial Q-values near zero.
pub const OUTPUT_INIT_SCALE: f64 = 0.01;

/// Hyperparameters an [`AgentSet`] needs to build and update its networks.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub hidden: Vec<usize>,
    pub actor_lr: f64,
    pub critic_lr: f64,
}

/// Online and target networks plus optimizer state of one AP.
#[derive(Debug, Clone, PartialEq)]
pub struct MaddpgAgent {
    pub actor: AgentNet,
    pub critic: AgentNet,
    pub target_actor: AgentNet,
    pub target_critic: AgentNet,
    pub actor_opt: OptimizerState,
    pub critic_opt: OptimizerState,
}

/// Losses reported by one joint update.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: Vec<f64>,
    pub actor_objective: Vec<f64>,
}

/// One agent per AP with homogeneous state and action sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSet {
    agents: Vec<MaddpgAgent>,
    state_dim: usize,
    action_dim: usize,
}

impl AgentSet {
    pub fn new<R: Rng + ?Sized>(
        num_agents: usize,
        state_dim: usize,
        action_dim: usize,
        cfg: &LearnerConfig,
        rng: &mut R,
    ) -> Self {
        let critic_in = num_agents * (state_dim + action_dim);
        let sizes = |input: usize, output: usize| {
            let mut v = vec![input];
            v.extend(&cfg.hidden);
            v.push(output);
            v
        };
        let agents = (0..num_agents)
            .map(|_| {
                let mut actor = AgentNet::new(&sizes(state_dim, action_dim), Activation::Tanh, rng);
                let mut critic = AgentNet::new(&sizes(critic_in, 1), Activation::Identity, rng);
                actor.scale_output_layer(OUTPUT_INIT_SCALE);
                critic.scale_output_layer(OUTPUT_INIT_SCALE);
                MaddpgAgent {
                    actor_opt: OptimizerState::new(&actor, AdamConfig::with_rate(cfg.actor_lr)),
                    critic_opt: OptimizerState::new(&critic, AdamConfig::with_rate(cfg.critic_lr)),
                    target_actor: actor.clone(),
                    target_critic: critic.clone(),
                    actor,
                    critic,
                }
            })
            .collect();
        AgentSet {
            agents,
            state_dim,
            action_dim,
        }
    }

    /// Reassembles a set from stored agents, checking their shapes agree.
    pub fn from_agents(agents: Vec<MaddpgAgent>) -> Result<Self> {
        let first = agents.first().ok_or(Error::EmptySamples("agent set"))?;
        let state_dim = first.actor.input_dim();
        let action_dim = first.actor.output_dim();
        let critic_in = agents.len() * (state_dim + action_dim);
        for a in &agents {
            let ok = a.actor.input_dim() == state_dim
                && a.actor.output_dim() == action_dim
                && a.critic.input_dim() == critic_in
                && a.critic.output_dim() == 1
                && a.target_actor.layer_sizes() == a.actor.layer_sizes()
                && a.target_critic.layer_sizes() == a.critic.layer_sizes();
            if !ok {
                return Err(Error::DimensionMismatch {
                    context: "AgentSet::from_agents",
                    expected: critic_in,
                    got: a.critic.input_dim(),
                });
            }
        }
        Ok(AgentSet {
            agents,
            state_dim,
            action_dim,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn agents(&self) -> &[MaddpgAgent] {
        &self.agents
    }

    pub fn agent(&self, m: usize) -> &MaddpgAgent {
        &self.agents[m]
    }

    pub fn agent_mut(&mut self, m: usize) -> &mut MaddpgAgent {
        &mut self.agents[m]
    }

    /// Noiseless policy output of agent `m`.
    pub fn act(&self, m: usize, state: &[f64]) -> Result<Vec<f64>> {
        self.agents[m].actor.forward(state)
    }

    pub fn explore<R: Rng + ?Sized>(&self, states: &[Vec<f64>], noise_std: f64, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        self.agents
            .iter()
            .zip(states)
            .map(|(a, s)| select_action(&a.actor, s, noise_std, rng))
            .collect()
    }

    /// Critic then actor step for every agent on a shared minibatch, followed
    /// by soft target updates. Agents are updated in parallel; each agent's
    /// step depends only on the batch and its own networks.
    pub fn update(&mut self, batch: &Batch, gamma: f64, tau: f64) -> Result<UpdateStats> {
        let target_actors: Vec<&AgentNet> = self.agents.iter().map(|a| &a.target_actor).collect();
        let target_critics: Vec<&AgentNet> = self.agents.iter().map(|a| &a.target_critic).collect();
        let y = critic_target(batch, &target_actors, &target_critics, gamma)?;
        let input = joint_input(&batch.states, &batch.actions);
        let state_dims = self.num_agents() * self.state_dim;
        let action_dim = self.action_dim;
        let results = self
            .agents
            .par_iter_mut()
            .enumerate()
            .map(|(m, agent)| -> Result<(f64, f64)> {
                let target = y.slice(s![.., m..m + 1]);
                let loss = update_critic(&mut agent.critic, &mut agent.critic_opt, input.view(), target)?;
                let objective = update_actor(
                    &mut agent.actor,
                    &mut agent.actor_opt,
                    &agent.critic,
                    input.view(),
                    batch.states[m].view(),
                    action_offset(state_dims, action_dim, m),
                )?;
                soft_update(&mut agent.target_critic, &agent.critic, tau)?;
                soft_update(&mut agent.target_actor, &agent.actor, tau)?;
                Ok((loss, objective))
            })
            .collect::<Result<Vec<_>>>()?;
        let (critic_loss, actor_objective) = results.into_iter().unzip();
        Ok(UpdateStats {
            critic_loss,
            actor_objective,
        })
    }
}
