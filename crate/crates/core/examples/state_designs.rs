//! Compares how quickly preliminary-positioning agents converge under the
//! RSS, AOA and joint (JAR) observation designs.

use cfloc::harness::{run_convergence_experiment, write_traces, ExperimentSpec, Scale, METRIC_EPISODES_TO_90};
use cfloc::SystemConfig;

fn main() -> cfloc::Result<()> {
    let mut spec = ExperimentSpec::defaults(Scale::Desk, vec![0, 1]);
    spec.system = SystemConfig {
        num_aps: 4,
        antennas_per_ap: 4,
        ..SystemConfig::desk().with_ues(2)
    };
    spec.stage1.episodes = 60;
    let res = run_convergence_experiment(&spec)?;
    for r in res.table.values(METRIC_EPISODES_TO_90) {
        println!(
            "{:>3} seed {}: 90% of final reward after {} episodes",
            r.sweep_value, r.seed, r.value
        );
    }
    let path = write_traces(&res.traces, &std::env::temp_dir().join("cfloc-example-traces"))?;
    println!("traces written to {}", path.display());
    Ok(())
}
