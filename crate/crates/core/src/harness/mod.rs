//! Configuration, experiment orchestration and result files.
//!
//! Config files are TOML with sections `[experiment]`, `[system]`, `[stage1]`,
//! `[stage2]` and `[baseline]`. Any key can be overridden from the
//! environment as `CFLOC_<SECTION>_<KEY>`.

mod config;
mod experiments;
mod results;
mod verbs;

pub use config::{
    load_config, load_config_with, parse_config, BaselineSection, ExperimentSection, ExperimentSpec, Scale, SweepValue,
    SweepVar, ENV_PREFIX,
};
pub use experiments::{
    baseline_mean_rmse, episodes_to_fraction, eval_rng, eval_scenes, mean_rmse, min_max_normalize, run_baseline_sweep,
    run_convergence_experiment, run_rmse_sweep, simulate, write_traces, ConvergenceResult, SimulationDump, TraceRow,
    FINAL_WINDOW, SMOOTHING_WINDOW, TRACES_FILE,
};
pub use results::{
    baseline_metric, emit_results, summarize, EmittedFiles, ResultRow, ResultTable, Summary, SummaryEntry,
    METRIC_EPISODES_TO_90, METRIC_EPISODE_REWARD, METRIC_RMSE, RESULTS_FILE, SUMMARY_FILE,
};

pub use verbs::{checkpoint_dir, run_verb, Verb, VerbReport};

/// File the resolved configuration is written to next to results.
pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.toml";

/// Writes the resolved configuration into `dir`.
pub fn write_resolved_config(spec: &ExperimentSpec, dir: &std::path::Path) -> crate::Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| crate::Error::io(dir, e))?;
    let path = dir.join(RESOLVED_CONFIG_FILE);
    std::fs::write(&path, spec.to_toml()).map_err(|e| crate::Error::io(&path, e))?;
    Ok(path)
}
