//! Agent checkpoints: `{dir}/{stage}/{agent}.bin`, one container per agent
//! holding a config hash, the four networks and both optimizer states.

use std::path::{Path, PathBuf};

use super::maddpg::{AgentSet, MaddpgAgent};
use super::train::Stage;
use crate::approx::container::{Decoder, Encoder};
use crate::error::{Error, Result};

pub fn agent_path(dir: &Path, stage: Stage, agent: usize) -> PathBuf {
    dir.join(stage.dir_name()).join(format!("{agent}.bin"))
}

/// Writes every agent of `set`; `config_hash` ties the files to the run configuration.
pub fn save_agents(dir: &Path, stage: Stage, set: &AgentSet, config_hash: &str) -> Result<()> {
    for (m, a) in set.agents().iter().enumerate() {
        let mut e = Encoder::new();
        e.bytes(config_hash.as_bytes());
        for net in [&a.actor, &a.critic, &a.target_actor, &a.target_critic] {
            e.net(net);
        }
        e.optimizer(&a.actor_opt);
        e.optimizer(&a.critic_opt);
        crate::approx::container::write_file(&agent_path(dir, stage, m), &e.finish())?;
    }
    Ok(())
}

/// Loads `num_agents` agents, rejecting files written under a different config hash.
pub fn load_agents(dir: &Path, stage: Stage, num_agents: usize, config_hash: &str) -> Result<AgentSet> {
    let agents = (0..num_agents)
        .map(|m| {
            let path = agent_path(dir, stage, m);
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let mut d = Decoder::new(&bytes, &path)?;
            let hash = d.bytes()?;
            if hash != config_hash.as_bytes() {
                return Err(Error::Container {
                    path: path.clone(),
                    reason: "written under a different configuration".into(),
                });
            }
            let actor = d.net()?;
            let critic = d.net()?;
            let target_actor = d.net()?;
            let target_critic = d.net()?;
            let actor_opt = d.optimizer(&actor)?;
            let critic_opt = d.optimizer(&critic)?;
            d.finish()?;
            Ok(MaddpgAgent {
                actor,
                critic,
                target_actor,
                target_critic,
                actor_opt,
                critic_opt,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    AgentSet::from_agents(agents)
}
