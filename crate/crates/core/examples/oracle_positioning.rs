//! Closes the positioning loop with perfect and with uniform-random per-AP
//! estimates to bracket what trained agents can achieve.

use cfloc::marl::{evaluate, OracleAgents, RandomAgents};
use cfloc::{seeded_rng, SystemConfig};

fn main() -> cfloc::Result<()> {
    let cfg = SystemConfig {
        shadow_std_db: 0.0,
        ..SystemConfig::desk()
    };
    let oracle = evaluate(&OracleAgents, 20, &cfg, 10, &mut seeded_rng(3))?;
    let random = evaluate(&RandomAgents, 100, &cfg, 10, &mut seeded_rng(4))?;
    println!("perfect estimates: RMSE {oracle:.2e} m");
    println!("random estimates:  RMSE {random:.2} m");
    Ok(())
}
