use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::baseline::{MatchCriterion, DEFAULT_NEIGHBORS};
use crate::error::{Error, Result};
use crate::marl::{StageConfig, StateDesign};
use crate::sysmodel::{thermal_noise_power, SystemConfig};

/// Prefix of environment variables that override config keys:
/// `CFLOC_<SECTION>_<KEY>`, e.g. `CFLOC_SYSTEM_NUM_APS=9`.
pub const ENV_PREFIX: &str = "CFLOC_";

const SECTIONS: [&str; 5] = ["experiment", "system", "stage1", "stage2", "baseline"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    NumAps,
    AntennasPerAp,
    GridSpacing,
    StateDesign,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::NumAps => "num_aps",
            SweepVar::AntennasPerAp => "antennas_per_ap",
            SweepVar::GridSpacing => "grid_spacing",
            SweepVar::StateDesign => "state_design",
        }
    }
}

/// A sweep coordinate: numeric for scenario sweeps, a name for state designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Name(String),
}

impl SweepValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            SweepValue::Number(v) => Some(*v),
            SweepValue::Name(_) => None,
        }
    }

    /// Total order: numbers before names, numbers by value.
    pub fn sort_cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (SweepValue::Number(a), SweepValue::Number(b)) => a.total_cmp(b),
            (SweepValue::Number(_), SweepValue::Name(_)) => Ordering::Less,
            (SweepValue::Name(_), SweepValue::Number(_)) => Ordering::Greater,
            (SweepValue::Name(a), SweepValue::Name(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepValue::Number(v) => write!(f, "{v}"),
            SweepValue::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub seeds: Vec<u64>,
    pub sweep_var: Option<SweepVar>,
    pub sweep_values: Vec<SweepValue>,
    /// Fresh layouts per RMSE evaluation.
    pub eval_layouts: usize,
    /// Write measured wall time per cell; off keeps result files byte-reproducible.
    pub record_wall_time: bool,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            seeds: Vec::new(),
            sweep_var: None,
            sweep_values: Vec::new(),
            eval_layouts: 20,
            record_wall_time: false,
            out: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    /// Reference-grid spacings evaluated alongside trained agents.
    pub grid_spacings: Vec<f64>,
    pub neighbors: usize,
    pub criterion: MatchCriterion,
    pub cache_dir: Option<PathBuf>,
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            grid_spacings: vec![0.5, 2.5],
            neighbors: DEFAULT_NEIGHBORS,
            criterion: MatchCriterion::Joint,
            cache_dir: None,
        }
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: ExperimentSection,
    pub system: SystemConfig,
    pub stage1: StageConfig,
    pub stage2: StageConfig,
    pub baseline: BaselineSection,
}

/// Which defaults fill keys the file leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    /// Full-size scenario (36 APs, 6 UEs, 8 antennas).
    #[default]
    Paper,
    /// Reduced scenario and budgets for desk hardware.
    Desk,
}

impl Scale {
    fn system(self) -> SystemConfig {
        match self {
            Scale::Paper => SystemConfig::default(),
            Scale::Desk => SystemConfig::desk(),
        }
    }

    fn stage(self) -> StageConfig {
        match self {
            Scale::Paper => StageConfig::default(),
            Scale::Desk => StageConfig {
                episodes: 200,
                fingerprint_blocks: 50,
                ..StageConfig::default()
            },
        }
    }
}

impl ExperimentSpec {
    /// Defaults for `scale` with the given seeds.
    pub fn defaults(scale: Scale, seeds: Vec<u64>) -> Self {
        ExperimentSpec {
            experiment: ExperimentSection {
                seeds,
                ..ExperimentSection::default()
            },
            system: scale.system(),
            stage1: scale.stage(),
            stage2: scale.stage(),
            baseline: BaselineSection::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.stage1.validate()?;
        self.stage2.validate()?;
        let e = &self.experiment;
        if e.seeds.is_empty() {
            return Err(Error::config("experiment.seeds", "at least one seed is required"));
        }
        let distinct: BTreeSet<u64> = e.seeds.iter().copied().collect();
        if distinct.len() != e.seeds.len() {
            return Err(Error::config("experiment.seeds", "seeds must be distinct"));
        }
        if e.eval_layouts == 0 {
            return Err(Error::config("experiment.eval_layouts", "must be positive"));
        }
        match e.sweep_var {
            None if !e.sweep_values.is_empty() => {
                return Err(Error::config("experiment.sweep_values", "given without sweep_var"));
            }
            Some(_) if e.sweep_values.is_empty() => {
                return Err(Error::config("experiment.sweep_values", "must be nonempty"));
            }
            _ => {}
        }
        if let Some(var) = e.sweep_var {
            for v in &e.sweep_values {
                check_sweep_value(var, v, &self.system)?;
            }
        }
        if self.baseline.neighbors == 0 {
            return Err(Error::config("baseline.neighbors", "must be at least 1"));
        }
        for &eta in &self.baseline.grid_spacings {
            if !(eta > 0.0 && eta <= self.system.area_side) {
                return Err(Error::config(
                    "baseline.grid_spacings",
                    "each spacing must lie in (0, area_side]",
                ));
            }
        }
        Ok(())
    }

    /// Stable hash of everything that shapes trained agents.
    pub fn training_hash(&self) -> String {
        crate::content_hash(&(&self.system, &self.stage1, &self.stage2))
    }

    /// The resolved configuration as TOML text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }
}

fn check_sweep_value(var: SweepVar, v: &SweepValue, system: &SystemConfig) -> Result<()> {
    let field = "experiment.sweep_values";
    match (var, v) {
        (SweepVar::StateDesign, SweepValue::Name(n)) => n.parse::<StateDesign>().map(|_| ()),
        (SweepVar::StateDesign, _) => Err(Error::config(field, "state_design values are names (rss, aoa, jar)")),
        (SweepVar::GridSpacing, SweepValue::Number(x)) if *x > 0.0 && *x <= system.area_side => Ok(()),
        (SweepVar::NumAps | SweepVar::AntennasPerAp, SweepValue::Number(x)) if *x >= 1.0 && x.fract() == 0.0 => Ok(()),
        _ => Err(Error::config(field, format!("{v} is not valid for {}", var.name()))),
    }
}

fn parse_error(path: &Path, message: impl fmt::Display) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

/// Raw file shape, used only to reject unknown keys with line information.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct FileShape {
    #[serde(default)]
    experiment: Option<ExperimentSection>,
    #[serde(default)]
    system: Option<SystemConfig>,
    #[serde(default)]
    stage1: Option<StageConfig>,
    #[serde(default)]
    stage2: Option<StageConfig>,
    #[serde(default)]
    baseline: Option<BaselineSection>,
}

fn env_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Applies `CFLOC_<SECTION>_<KEY>` overrides to a parsed table.
fn apply_env<I>(table: &mut Table, env: I, origin: &Path) -> Result<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    let mut vars: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
    vars.sort();
    for (name, raw) in vars {
        let rest = name[ENV_PREFIX.len()..].to_ascii_lowercase();
        let (section, key) = rest
            .split_once('_')
            .filter(|(s, k)| SECTIONS.contains(s) && !k.is_empty())
            .ok_or_else(|| {
                parse_error(
                    origin,
                    format!("environment variable {name} does not name a config key"),
                )
            })?;
        let entry = table
            .entry(section.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        let Value::Table(t) = entry else {
            return Err(parse_error(origin, format!("[{section}] is not a section")));
        };
        t.insert(key.to_string(), env_value(&raw));
    }
    Ok(())
}

fn overlay<T: Serialize + for<'de> Deserialize<'de>>(
    base: &T,
    user: Option<&Table>,
    section: &str,
    origin: &Path,
) -> Result<T> {
    let mut merged = Table::try_from(base).expect("defaults serialize");
    if let Some(user) = user {
        for (k, v) in user {
            merged.insert(k.clone(), v.clone());
        }
    }
    merged
        .try_into()
        .map_err(|e| parse_error(origin, format!("[{section}]: {e}")))
}

/// Parses config text, applies environment overrides and derived defaults,
/// and validates the result.
///
/// Derived defaults: `pilot_length` follows `num_ues`, and `noise_power`
/// follows `bandwidth`, unless set explicitly.
pub fn parse_config<I>(text: &str, origin: &Path, scale: Scale, env: I) -> Result<ExperimentSpec>
where
    I: IntoIterator<Item = (String, String)>,
{
    toml::from_str::<FileShape>(text).map_err(|e| parse_error(origin, e))?;
    let mut table: Table = toml::from_str(text).map_err(|e| parse_error(origin, e))?;
    apply_env(&mut table, env, origin)?;
    for key in table.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            return Err(parse_error(origin, format!("unknown section `{key}`")));
        }
    }
    let section = |name: &str| -> Result<Option<Table>> {
        match table.get(name) {
            None => Ok(None),
            Some(Value::Table(t)) => Ok(Some(t.clone())),
            Some(_) => Err(parse_error(origin, format!("`{name}` must be a section"))),
        }
    };
    let defaults = ExperimentSpec::defaults(scale, Vec::new());

    let mut user_system = section("system")?.unwrap_or_default();
    let sized: SystemConfig = overlay(&defaults.system, Some(&user_system), "system", origin)?;
    if !user_system.contains_key("pilot_length") {
        user_system.insert("pilot_length".into(), Value::Integer(sized.num_ues as i64));
    }
    if !user_system.contains_key("noise_power") {
        user_system.insert("noise_power".into(), Value::Float(thermal_noise_power(sized.bandwidth)));
    }

    let spec = ExperimentSpec {
        experiment: overlay(
            &defaults.experiment,
            section("experiment")?.as_ref(),
            "experiment",
            origin,
        )?,
        system: overlay(&defaults.system, Some(&user_system), "system", origin)?,
        stage1: overlay(&defaults.stage1, section("stage1")?.as_ref(), "stage1", origin)?,
        stage2: overlay(&defaults.stage2, section("stage2")?.as_ref(), "stage2", origin)?,
        baseline: overlay(&defaults.baseline, section("baseline")?.as_ref(), "baseline", origin)?,
    };
    spec.validate()?;
    Ok(spec)
}

/// Reads and resolves a config file with full-size defaults and the process
/// environment's `CFLOC_*` overrides.
pub fn load_config(path: &Path) -> Result<ExperimentSpec> {
    load_config_with(path, Scale::Paper, std::env::vars())
}

pub fn load_config_with<I>(path: &Path, scale: Scale, env: I) -> Result<ExperimentSpec>
where
    I: IntoIterator<Item = (String, String)>,
{
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path, scale, env)
}
