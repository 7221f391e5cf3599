use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::SweepValue;
use crate::error::{Error, Result};

pub const METRIC_RMSE: &str = "rmse_m";
pub const METRIC_EPISODE_REWARD: &str = "episode_reward";
pub const METRIC_EPISODES_TO_90: &str = "episodes_to_90pct";

/// Metric name for the grid baseline at spacing `eta` inside a trained-agent sweep.
pub fn baseline_metric(eta: f64) -> String {
    format!("{METRIC_RMSE}_baseline_eta{eta}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep_var: String,
    pub sweep_value: SweepValue,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
    pub wall_time: f64,
}

/// Result rows plus free-form header entries echoed into the summary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub header: BTreeMap<String, String>,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: ResultRow) -> Result<()> {
        if !row.value.is_finite() {
            return Err(Error::DegenerateConfig(format!(
                "non-finite {} for {} = {}, seed {}",
                row.metric, row.sweep_var, row.sweep_value, row.seed
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn extend(&mut self, other: ResultTable) {
        self.header.extend(other.header);
        self.rows.extend(other.rows);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Stable sort by (sweep_var, sweep_value, seed, metric); rows that tie
    /// (e.g. a per-episode trace) keep their insertion order.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.sweep_var
                .cmp(&b.sweep_var)
                .then_with(|| a.sweep_value.sort_cmp(&b.sweep_value))
                .then(a.seed.cmp(&b.seed))
                .then_with(|| a.metric.cmp(&b.metric))
        });
    }

    pub fn values<'a>(&'a self, metric: &'a str) -> impl Iterator<Item = &'a ResultRow> + 'a {
        self.rows.iter().filter(move |r| r.metric == metric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryEntry {
    pub sweep_var: String,
    pub sweep_value: SweepValue,
    pub metric: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1); absent for a single value.
    pub std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub header: BTreeMap<String, String>,
    pub entries: Vec<SummaryEntry>,
}

/// Mean and sample std per (sweep_var, sweep_value, metric), in sorted order.
pub fn summarize(table: &ResultTable) -> Summary {
    let mut sorted = table.clone();
    sorted.sort();
    let mut entries: Vec<SummaryEntry> = Vec::new();
    let mut groups: Vec<(usize, Vec<f64>)> = Vec::new();
    for row in &sorted.rows {
        let pos = entries
            .iter()
            .position(|e| e.sweep_var == row.sweep_var && e.sweep_value == row.sweep_value && e.metric == row.metric);
        let idx = match pos {
            Some(i) => i,
            None => {
                entries.push(SummaryEntry {
                    sweep_var: row.sweep_var.clone(),
                    sweep_value: row.sweep_value.clone(),
                    metric: row.metric.clone(),
                    n: 0,
                    mean: 0.0,
                    std: None,
                });
                groups.push((entries.len() - 1, Vec::new()));
                entries.len() - 1
            }
        };
        groups[idx].1.push(row.value);
    }
    for (idx, vals) in groups {
        let n = vals.len();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let std = (n > 1).then(|| (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
        entries[idx].n = n;
        entries[idx].mean = mean;
        entries[idx].std = std;
    }
    entries.sort_by(|a, b| {
        a.sweep_var
            .cmp(&b.sweep_var)
            .then_with(|| a.sweep_value.sort_cmp(&b.sweep_value))
            .then_with(|| a.metric.cmp(&b.metric))
    });
    Summary {
        header: table.header.clone(),
        entries,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmittedFiles {
    pub csv: PathBuf,
    pub summary: PathBuf,
}

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Writes `results.csv` and `summary.json` into `dir`. Rows are sorted first,
/// so identical tables always produce identical bytes.
pub fn emit_results(table: &ResultTable, dir: &Path) -> Result<EmittedFiles> {
    if table.is_empty() {
        return Err(Error::EmptySamples("result table"));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut sorted = table.clone();
    sorted.sort();

    let csv_path = dir.join(RESULTS_FILE);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sweep_var", "sweep_value", "seed", "metric", "value", "wall_time"])
        .map_err(|e| Error::io(&csv_path, e.into()))?;
    for r in &sorted.rows {
        w.write_record([
            r.sweep_var.clone(),
            r.sweep_value.to_string(),
            r.seed.to_string(),
            r.metric.clone(),
            r.value.to_string(),
            r.wall_time.to_string(),
        ])
        .map_err(|e| Error::io(&csv_path, e.into()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(&csv_path, e.into_error()))?;
    std::fs::write(&csv_path, bytes).map_err(|e| Error::io(&csv_path, e))?;

    let summary_path = dir.join(SUMMARY_FILE);
    let mut json = serde_json::to_string_pretty(&summarize(&sorted)).expect("summary serializes");
    json.push('\n');
    std::fs::write(&summary_path, json).map_err(|e| Error::io(&summary_path, e))?;
    Ok(EmittedFiles {
        csv: csv_path,
        summary: summary_path,
    })
}
