use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentSpec, SweepValue, SweepVar};
use super::results::{
    baseline_metric, ResultRow, ResultTable, METRIC_EPISODES_TO_90, METRIC_EPISODE_REWARD, METRIC_RMSE,
};
use crate::baseline::{baseline_rmse, build_grid, GridCache};
use crate::error::{Error, Result};
use crate::locate::rmse;
use crate::marl::{locate_scene, train_design, train_two_stage, DcpAgents, Positioner, RewardKind, Scene, StateDesign};
use crate::sysmodel::SystemConfig;
use crate::{seeded_rng, SimRng};

/// Offset separating a seed's evaluation stream from its training stream.
const EVAL_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Window of the trailing mean applied before locating the 90% crossing.
pub const SMOOTHING_WINDOW: usize = 10;
/// Episodes at the end of a trace whose median defines the final level.
pub const FINAL_WINDOW: usize = 20;

pub fn eval_rng(seed: u64) -> SimRng {
    seeded_rng(seed.wrapping_add(EVAL_STREAM))
}

/// `(v - min) / (max - min)`; all zeros for a constant trace.
pub fn min_max_normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// First episode at which the smoothed, min-max normalised reward trace
/// reaches `fraction` of its final median level.
///
/// Smoothing is a trailing mean over [`SMOOTHING_WINDOW`] episodes; the final
/// level is the median of the last [`FINAL_WINDOW`] normalised values.
pub fn episodes_to_fraction(rewards: &[f64], fraction: f64) -> usize {
    if rewards.is_empty() {
        return 0;
    }
    let smoothed: Vec<f64> = (0..rewards.len())
        .map(|e| {
            let lo = (e + 1).saturating_sub(SMOOTHING_WINDOW);
            rewards[lo..=e].iter().sum::<f64>() / (e + 1 - lo) as f64
        })
        .collect();
    let norm = min_max_normalize(&smoothed);
    let tail = &norm[norm.len().saturating_sub(FINAL_WINDOW)..];
    let target = fraction * median(tail);
    norm.iter().position(|&v| v >= target).unwrap_or(norm.len())
}

fn wall(start: Instant, record: bool) -> f64 {
    if record {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    }
}

fn scenario_header(table: &mut ResultTable, system: &SystemConfig) {
    table.header.insert(
        "scenario".into(),
        format!(
            "M={} K={} tau_p={} L={} spacing={}*lambda area={}m",
            system.num_aps,
            system.num_ues,
            system.pilot_length,
            system.antennas_per_ap,
            system.antenna_spacing_ratio,
            system.area_side
        ),
    );
}

/// Runs `cells` in parallel and gathers their rows into one sorted table.
fn run_cells<C, F>(cells: Vec<C>, f: F) -> Result<ResultTable>
where
    C: Send + Sync,
    F: Fn(&C) -> Result<Vec<ResultRow>> + Send + Sync,
{
    let rows = cells.par_iter().map(&f).collect::<Result<Vec<_>>>()?;
    let mut table = ResultTable::new();
    for r in rows.into_iter().flatten() {
        table.push(r)?;
    }
    table.sort();
    Ok(table)
}

/// Draws `n` evaluation scenes from the seed's evaluation stream.
pub fn eval_scenes(system: &SystemConfig, n: usize, blocks: usize, seed: u64) -> Result<Vec<Scene>> {
    let mut rng = eval_rng(seed);
    (0..n).map(|_| Scene::draw(system, blocks, &mut rng)).collect()
}

/// Mean per-scene RMSE of a positioner.
pub fn mean_rmse<P: Positioner + ?Sized>(
    positioner: &P,
    scenes: &[Scene],
    system: &SystemConfig,
    seed: u64,
) -> Result<f64> {
    if scenes.is_empty() {
        return Err(Error::EmptySamples("evaluation scenes"));
    }
    let mut rng = eval_rng(seed ^ 1);
    let mut total = 0.0;
    for scene in scenes {
        let est = locate_scene(positioner, scene, system, &mut rng)?;
        total += rmse(&scene.layout.ue_positions, &est.fused, system.area_side)?;
    }
    Ok(total / scenes.len() as f64)
}

/// Mean per-scene RMSE of the reference-grid baseline at spacing `eta`.
pub fn baseline_mean_rmse(spec: &ExperimentSpec, system: &SystemConfig, scenes: &[Scene], eta: f64) -> Result<f64> {
    if scenes.is_empty() {
        return Err(Error::EmptySamples("evaluation scenes"));
    }
    let b = &spec.baseline;
    let cache = b.cache_dir.as_ref().map(GridCache::new);
    let mut total = 0.0;
    for scene in scenes {
        let grid = match &cache {
            Some(c) => c.get_or_build(eta, &scene.layout, system)?,
            None => build_grid(eta, &scene.layout, system)?,
        };
        total += baseline_rmse(
            &grid,
            &scene.layout,
            &scene.fingerprints,
            system,
            b.criterion,
            b.neighbors,
        )?;
    }
    Ok(total / scenes.len() as f64)
}

/// Per-episode reward of one convergence run, raw and min-max normalised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub design: String,
    pub seed: u64,
    pub episode: usize,
    pub reward: f64,
    pub normalized: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceResult {
    pub table: ResultTable,
    pub traces: Vec<TraceRow>,
}

fn designs(spec: &ExperimentSpec) -> Result<Vec<StateDesign>> {
    match spec.experiment.sweep_var {
        None => Ok(StateDesign::ALL.to_vec()),
        Some(SweepVar::StateDesign) => spec
            .experiment
            .sweep_values
            .iter()
            .map(|v| v.to_string().parse())
            .collect(),
        Some(other) => Err(Error::config(
            "experiment.sweep_var",
            format!("convergence runs sweep state_design, not {}", other.name()),
        )),
    }
}

/// Trains preliminary-positioning agents under each state design and seed.
///
/// Every design is scored with the joint AOA/RSS reward so that only the
/// observation differs between designs.
pub fn run_convergence_experiment(spec: &ExperimentSpec) -> Result<ConvergenceResult> {
    spec.validate()?;
    let cells: Vec<(StateDesign, u64)> = designs(spec)?
        .into_iter()
        .flat_map(|d| spec.experiment.seeds.iter().map(move |&s| (d, s)))
        .collect();
    let record = spec.experiment.record_wall_time;
    let outcomes = cells
        .par_iter()
        .map(|&(design, seed)| {
            let start = Instant::now();
            let out = train_design(
                &spec.system,
                &spec.stage1,
                design,
                RewardKind::Joint,
                &mut seeded_rng(seed),
            )?;
            Ok((design, seed, out, wall(start, record)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = ResultTable::new();
    scenario_header(&mut table, &spec.system);
    table.header.insert("reward".into(), "joint".into());
    let mut traces = Vec::new();
    for (design, seed, out, wall_time) in outcomes {
        let rewards = out.rewards();
        let value = SweepValue::Name(design.to_string());
        let row = |metric: &str, v: f64| ResultRow {
            sweep_var: SweepVar::StateDesign.name().into(),
            sweep_value: value.clone(),
            seed,
            metric: metric.into(),
            value: v,
            wall_time,
        };
        for &r in &rewards {
            table.push(row(METRIC_EPISODE_REWARD, r))?;
        }
        table.push(row(METRIC_EPISODES_TO_90, episodes_to_fraction(&rewards, 0.9) as f64))?;
        let norm = min_max_normalize(&rewards);
        for (rec, n) in out.trace.iter().zip(norm) {
            traces.push(TraceRow {
                design: design.to_string(),
                seed,
                episode: rec.episode,
                reward: rec.mean_reward,
                normalized: n,
                rmse: rec.rmse,
            });
        }
    }
    table.sort();
    Ok(ConvergenceResult { table, traces })
}

pub const TRACES_FILE: &str = "traces.csv";

pub fn write_traces(traces: &[TraceRow], dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(TRACES_FILE);
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in traces {
        w.serialize(t).map_err(|e| Error::io(&path, e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
    std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn scenario_for(system: &SystemConfig, var: SweepVar, value: &SweepValue) -> Result<SystemConfig> {
    let x = value
        .as_f64()
        .ok_or_else(|| Error::config("experiment.sweep_values", format!("{value} is not numeric")))?;
    let mut s = system.clone();
    match var {
        SweepVar::NumAps => s.num_aps = x as usize,
        SweepVar::AntennasPerAp => s.antennas_per_ap = x as usize,
        _ => {
            return Err(Error::config(
                "experiment.sweep_var",
                format!("RMSE sweeps vary num_aps or antennas_per_ap, not {}", var.name()),
            ))
        }
    }
    s.validate()?;
    Ok(s)
}

/// Trains both stages for every (sweep value, seed) cell and evaluates the
/// agents and the grid baselines on the same evaluation scenes.
pub fn run_rmse_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let var = spec
        .experiment
        .sweep_var
        .ok_or_else(|| Error::config("experiment.sweep_var", "RMSE sweeps need num_aps or antennas_per_ap"))?;
    let cells: Vec<(SweepValue, u64)> = spec
        .experiment
        .sweep_values
        .iter()
        .flat_map(|v| spec.experiment.seeds.iter().map(move |&s| (v.clone(), s)))
        .collect();
    let record = spec.experiment.record_wall_time;
    let mut table = run_cells(cells, |(value, seed)| {
        let system = scenario_for(&spec.system, var, value)?;
        let start = Instant::now();
        let trained = train_two_stage(&system, &spec.stage1, &spec.stage2, &mut seeded_rng(*seed))?;
        let agents = DcpAgents::new(trained.stage1.agents, Some(trained.stage2.agents));
        let scenes = eval_scenes(
            &system,
            spec.experiment.eval_layouts,
            spec.stage1.fingerprint_blocks,
            *seed,
        )?;
        let dcp = mean_rmse(&agents, &scenes, &system, *seed)?;
        let row = |metric: String, v: f64, wall_time: f64| ResultRow {
            sweep_var: var.name().into(),
            sweep_value: value.clone(),
            seed: *seed,
            metric,
            value: v,
            wall_time,
        };
        let mut rows = vec![row(METRIC_RMSE.into(), dcp, wall(start, record))];
        for &eta in &spec.baseline.grid_spacings {
            let start = Instant::now();
            let b = baseline_mean_rmse(spec, &system, &scenes, eta)?;
            rows.push(row(baseline_metric(eta), b, wall(start, record)));
        }
        Ok(rows)
    })?;
    scenario_header(&mut table, &spec.system);
    Ok(table)
}

/// Grid-baseline RMSE per spacing and seed. Spacings come from a
/// `grid_spacing` sweep if configured, otherwise from `baseline.grid_spacings`.
pub fn run_baseline_sweep(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let spacings: Vec<f64> = match spec.experiment.sweep_var {
        Some(SweepVar::GridSpacing) => spec
            .experiment
            .sweep_values
            .iter()
            .filter_map(SweepValue::as_f64)
            .collect(),
        None => spec.baseline.grid_spacings.clone(),
        Some(other) => {
            return Err(Error::config(
                "experiment.sweep_var",
                format!("baseline sweeps vary grid_spacing, not {}", other.name()),
            ))
        }
    };
    if spacings.is_empty() {
        return Err(Error::config("baseline.grid_spacings", "no spacings to evaluate"));
    }
    let cells: Vec<(f64, u64)> = spacings
        .iter()
        .flat_map(|&eta| spec.experiment.seeds.iter().map(move |&s| (eta, s)))
        .collect();
    let record = spec.experiment.record_wall_time;
    let mut table = run_cells(cells, |&(eta, seed)| {
        let start = Instant::now();
        let scenes = eval_scenes(
            &spec.system,
            spec.experiment.eval_layouts,
            spec.stage1.fingerprint_blocks,
            seed,
        )?;
        let value = baseline_mean_rmse(spec, &spec.system, &scenes, eta)?;
        Ok(vec![ResultRow {
            sweep_var: SweepVar::GridSpacing.name().into(),
            sweep_value: SweepValue::Number(eta),
            seed,
            metric: METRIC_RMSE.into(),
            value,
            wall_time: wall(start, record),
        }])
    })?;
    scenario_header(&mut table, &spec.system);
    Ok(table)
}

/// One simulated layout with its fingerprints.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationDump<'a> {
    pub seed: u64,
    pub system: &'a SystemConfig,
    pub layout: &'a crate::Layout,
    pub fingerprints: &'a [crate::fingerprint::Fingerprint],
}

/// Draws one scene per seed and writes it as `simulate/seed_<seed>.json`.
pub fn simulate(spec: &ExperimentSpec, dir: &Path) -> Result<Vec<PathBuf>> {
    spec.validate()?;
    let out = dir.join("simulate");
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    spec.experiment
        .seeds
        .iter()
        .map(|&seed| {
            let scene = Scene::draw(&spec.system, spec.stage1.fingerprint_blocks, &mut seeded_rng(seed))?;
            let dump = SimulationDump {
                seed,
                system: &spec.system,
                layout: &scene.layout,
                fingerprints: &scene.fingerprints,
            };
            let path = out.join(format!("seed_{seed}.json"));
            let json = serde_json::to_string_pretty(&dump).expect("dump serializes");
            std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
