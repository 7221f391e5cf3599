//! Parses an experiment file with an environment override, runs a small
//! baseline sweep and writes the CSV and JSON summary.

use std::path::Path;

use cfloc::harness::{emit_results, parse_config, run_baseline_sweep, Scale};

const CONFIG: &str = r#"
[experiment]
seeds = [1, 2]
eval_layouts = 3
sweep_var = "grid_spacing"
sweep_values = [5.0, 10.0]

[system]
shadow_std_db = 0.0
"#;

fn main() -> cfloc::Result<()> {
    let env = [("CFLOC_SYSTEM_NUM_APS".to_string(), "9".to_string())];
    let spec = parse_config(CONFIG, Path::new("inline.toml"), Scale::Desk, env)?;
    println!(
        "resolved: {} APs, {} UEs, seeds {:?}",
        spec.system.num_aps, spec.system.num_ues, spec.experiment.seeds
    );
    let table = run_baseline_sweep(&spec)?;
    let dir = std::env::temp_dir().join("cfloc-example-results");
    let files = emit_results(&table, &dir)?;
    println!("{} rows written to {}", table.len(), files.csv.display());
    println!("summary written to {}", files.summary.display());
    Ok(())
}
