//! RMSE of trained agents and of the grid baseline as the number of APs grows.

use cfloc::harness::{run_rmse_sweep, ExperimentSpec, Scale, SweepValue, SweepVar};
use cfloc::SystemConfig;

fn main() -> cfloc::Result<()> {
    let mut spec = ExperimentSpec::defaults(Scale::Desk, vec![0]);
    spec.system = SystemConfig {
        antennas_per_ap: 4,
        ..SystemConfig::desk().with_ues(2)
    };
    spec.experiment.sweep_var = Some(SweepVar::NumAps);
    spec.experiment.sweep_values = vec![SweepValue::Number(4.0), SweepValue::Number(9.0)];
    spec.experiment.eval_layouts = 5;
    spec.stage1.episodes = 40;
    spec.stage2.episodes = 40;
    spec.baseline.grid_spacings = vec![5.0];
    for r in &run_rmse_sweep(&spec)?.rows {
        println!(
            "M = {:>2} seed {}: {} = {:.2}",
            r.sweep_value, r.seed, r.metric, r.value
        );
    }
    Ok(())
}
