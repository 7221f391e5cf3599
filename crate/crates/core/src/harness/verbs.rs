use std::path::{Path, PathBuf};

use super::config::{ExperimentSpec, SweepValue, SweepVar};
use super::experiments::{
    eval_scenes, mean_rmse, run_baseline_sweep, run_convergence_experiment, run_rmse_sweep, simulate, write_traces,
};
use super::results::{emit_results, ResultRow, ResultTable, METRIC_EPISODE_REWARD, METRIC_RMSE};
use super::write_resolved_config;
use crate::error::{Error, Result};
use crate::marl::checkpoint::{load_agents, save_agents};
use crate::marl::{train_two_stage, DcpAgents, RandomAgents, Stage};
use crate::seeded_rng;

/// Command-line actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    /// Dump one layout and its fingerprints per seed.
    Simulate,
    /// Train both stages for the first seed and checkpoint the agents.
    Train,
    /// Evaluate checkpointed agents against random agents.
    Evaluate,
    /// Reference-grid baseline RMSE per spacing.
    Baseline,
    /// Run the configured sweep.
    Sweep,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Simulate => "simulate",
            Verb::Train => "train",
            Verb::Evaluate => "evaluate",
            Verb::Baseline => "baseline",
            Verb::Sweep => "sweep",
        }
    }
}

/// Files a verb produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerbReport {
    pub files: Vec<PathBuf>,
}

pub fn checkpoint_dir(out: &Path) -> PathBuf {
    out.join("ckpt")
}

fn emit(table: &ResultTable, dir: &Path, report: &mut VerbReport) -> Result<()> {
    let f = emit_results(table, dir)?;
    report.files.push(f.csv);
    report.files.push(f.summary);
    Ok(())
}

/// Runs `verb`, writing its outputs under `out/<verb>/` (checkpoints under `out/ckpt/`).
pub fn run_verb(verb: Verb, spec: &ExperimentSpec, out: &Path) -> Result<VerbReport> {
    spec.validate()?;
    let dir = out.join(verb.name());
    let mut report = VerbReport::default();
    report.files.push(write_resolved_config(spec, &dir)?);
    match verb {
        Verb::Simulate => report.files.extend(simulate(spec, &dir)?),
        Verb::Train => {
            let seed = spec.experiment.seeds[0];
            let trained = train_two_stage(&spec.system, &spec.stage1, &spec.stage2, &mut seeded_rng(seed))?;
            let hash = spec.training_hash();
            let ckpt = checkpoint_dir(out);
            save_agents(&ckpt, Stage::Preliminary, &trained.stage1.agents, &hash)?;
            save_agents(&ckpt, Stage::Correction, &trained.stage2.agents, &hash)?;
            report.files.push(ckpt);
            let mut table = ResultTable::new();
            for (stage, outcome) in [(1.0, &trained.stage1), (2.0, &trained.stage2)] {
                for r in outcome.rewards() {
                    table.push(ResultRow {
                        sweep_var: "stage".into(),
                        sweep_value: SweepValue::Number(stage),
                        seed,
                        metric: METRIC_EPISODE_REWARD.into(),
                        value: r,
                        wall_time: 0.0,
                    })?;
                }
            }
            emit(&table, &dir, &mut report)?;
        }
        Verb::Evaluate => {
            let ckpt = checkpoint_dir(out);
            let hash = spec.training_hash();
            let m = spec.system.num_aps;
            let stage1 = load_agents(&ckpt, Stage::Preliminary, m, &hash)?;
            let stage2 = load_agents(&ckpt, Stage::Correction, m, &hash)?;
            let dcp = DcpAgents::new(stage1.clone(), Some(stage2));
            let s1_only = DcpAgents::new(stage1, None);
            let mut table = ResultTable::new();
            for &seed in &spec.experiment.seeds {
                let scenes = eval_scenes(
                    &spec.system,
                    spec.experiment.eval_layouts,
                    spec.stage1.fingerprint_blocks,
                    seed,
                )?;
                let schemes: [(&str, &dyn crate::marl::Positioner); 3] =
                    [("dcp", &dcp), ("stage1_only", &s1_only), ("random", &RandomAgents)];
                for (name, p) in schemes {
                    table.push(ResultRow {
                        sweep_var: "scheme".into(),
                        sweep_value: SweepValue::Name(name.into()),
                        seed,
                        metric: METRIC_RMSE.into(),
                        value: mean_rmse(p, &scenes, &spec.system, seed)?,
                        wall_time: 0.0,
                    })?;
                }
            }
            emit(&table, &dir, &mut report)?;
        }
        Verb::Baseline => emit(&run_baseline_sweep(spec)?, &dir, &mut report)?,
        Verb::Sweep => match spec.experiment.sweep_var {
            Some(SweepVar::StateDesign) => {
                let res = run_convergence_experiment(spec)?;
                emit(&res.table, &dir, &mut report)?;
                report.files.push(write_traces(&res.traces, &dir)?);
            }
            Some(SweepVar::NumAps | SweepVar::AntennasPerAp) => emit(&run_rmse_sweep(spec)?, &dir, &mut report)?,
            Some(SweepVar::GridSpacing) => emit(&run_baseline_sweep(spec)?, &dir, &mut report)?,
            None => {
                return Err(Error::config(
                    "experiment.sweep_var",
                    "the sweep verb needs a sweep variable",
                ))
            }
        },
    }
    Ok(report)
}
