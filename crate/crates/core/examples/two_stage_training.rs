//! Trains preliminary-positioning and angle-correction agents on a small
//! scenario and compares them with random agents on fresh layouts.

use cfloc::marl::{evaluate, train_two_stage, DcpAgents, RandomAgents, StageConfig};
use cfloc::{seeded_rng, SystemConfig};

fn main() -> cfloc::Result<()> {
    let sys = SystemConfig {
        num_aps: 4,
        antennas_per_ap: 4,
        ..SystemConfig::desk().with_ues(2)
    };
    let cfg = StageConfig {
        episodes: 100,
        ..StageConfig::default()
    };
    let out = train_two_stage(&sys, &cfg, &cfg, &mut seeded_rng(0))?;
    for (name, stage) in [("stage 1", &out.stage1), ("stage 2", &out.stage2)] {
        let r = stage.rewards();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "{name}: first-10 reward {:.3}, last-10 reward {:.3}",
            mean(&r[..10]),
            mean(&r[r.len() - 10..])
        );
    }
    let agents = DcpAgents::new(out.stage1.agents, Some(out.stage2.agents));
    let trained = evaluate(&agents, 20, &sys, 50, &mut seeded_rng(100))?;
    let random = evaluate(&RandomAgents, 20, &sys, 50, &mut seeded_rng(100))?;
    println!("RMSE trained {trained:.2} m, random {random:.2} m");
    Ok(())
}
