//! Observation encodings, action decoding, rewards and the stage environments.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::maddpg::AgentSet;
use crate::error::{Error, Result};
use crate::fingerprint::{
    aoa_similarity, dft_matrix, extract_fingerprints, joint_from_parts, rss_similarity_all, Fingerprint,
};
use crate::locate::{forward_aoa_with, forward_rss, fuse_estimates, polar_to_position, rmse, Polar};
use crate::sysmodel::{generate_layout, large_scale_fading, wrap_angle, Layout, Point, SystemConfig};
use crate::SimRng;

/// A layout together with the observed fingerprints of its UEs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub layout: Layout,
    pub fingerprints: Vec<Fingerprint>,
}

impl Scene {
    pub fn draw(config: &SystemConfig, blocks: usize, rng: &mut SimRng) -> Result<Self> {
        let layout = generate_layout(config, rng);
        let fingerprints = extract_fingerprints(&layout, config, blocks, rng)?;
        Ok(Scene { layout, fingerprints })
    }

    pub fn num_aps(&self) -> usize {
        self.layout.num_aps()
    }

    pub fn num_ues(&self) -> usize {
        self.layout.num_ues()
    }
}

/// Maps normalised actor outputs in `[-1, 1]` to physical quantities.
///
/// Preliminary actions are `[d_1..d_K, theta_1..theta_K]`; correction actions
/// are `[dtheta_1..dtheta_K]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionBounds {
    pub max_distance: f64,
    pub max_correction: f64,
}

impl ActionBounds {
    pub fn for_config(config: &SystemConfig) -> Self {
        ActionBounds {
            max_distance: config.max_wrap_distance(),
            max_correction: PI / 8.0,
        }
    }

    pub fn decode_preliminary(&self, action: &[f64]) -> Vec<Polar> {
        let k_count = action.len() / 2;
        (0..k_count)
            .map(|k| Polar {
                distance: (action[k].clamp(-1.0, 1.0) + 1.0) / 2.0 * self.max_distance,
                angle: wrap_angle(PI * action[k_count + k].clamp(-1.0, 1.0)),
            })
            .collect()
    }

    pub fn encode_preliminary(&self, polar: &[Polar]) -> Vec<f64> {
        let d = polar.iter().map(|p| 2.0 * p.distance / self.max_distance - 1.0);
        let a = polar.iter().map(|p| wrap_angle(p.angle) / PI);
        d.chain(a).collect()
    }

    pub fn decode_correction(&self, action: &[f64]) -> Vec<f64> {
        action
            .iter()
            .map(|a| a.clamp(-1.0, 1.0) * self.max_correction)
            .collect()
    }
}

/// Affine map from RSS in dB to roughly `[-1, 1]`, anchored at the RSS of the
/// nearest (height-only) and farthest (wrap corner) unshadowed links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RssScale {
    pub mid_db: f64,
    pub half_range_db: f64,
}

impl RssScale {
    pub fn for_config(config: &SystemConfig) -> Self {
        let gain = config.antennas_per_ap as f64 * config.pilot_energy();
        let db = |d3: f64| 10.0 * (gain * large_scale_fading(d3, 0.0)).log10();
        let hi = db(config.ap_ue_height_diff);
        let lo = db(config.max_wrap_distance().hypot(config.ap_ue_height_diff));
        RssScale {
            mid_db: (hi + lo) / 2.0,
            half_range_db: (hi - lo) / 2.0,
        }
    }

    pub fn apply(&self, psi: f64) -> f64 {
        (10.0 * psi.max(1e-300).log10() - self.mid_db) / self.half_range_db
    }
}

/// Which fingerprint an actor observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateDesign {
    Rss,
    Aoa,
    Jar,
}

impl StateDesign {
    pub const ALL: [StateDesign; 3] = [StateDesign::Rss, StateDesign::Aoa, StateDesign::Jar];

    pub fn state_dim(self, num_ues: usize, antennas: usize) -> usize {
        match self {
            StateDesign::Rss => num_ues,
            StateDesign::Aoa => num_ues * antennas,
            StateDesign::Jar => num_ues * (antennas + 1),
        }
    }
}

impl fmt::Display for StateDesign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateDesign::Rss => "rss",
            StateDesign::Aoa => "aoa",
            StateDesign::Jar => "jar",
        })
    }
}

impl FromStr for StateDesign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rss" => Ok(StateDesign::Rss),
            "aoa" => Ok(StateDesign::Aoa),
            "jar" => Ok(StateDesign::Jar),
            other => Err(Error::config("state_design", format!("unknown design {other:?}"))),
        }
    }
}

/// Stage-1 observation of AP `m`: its RSS towards every UE, scaled dB.
pub fn stage1_state(fingerprints: &[Fingerprint], m: usize, scale: &RssScale) -> Vec<f64> {
    fingerprints.iter().map(|fp| scale.apply(fp.rss[m])).collect()
}

/// AP `m`'s beamspace power towards every UE, each column peak-normalised to `[-1, 1]`.
pub fn aoa_state(fingerprints: &[Fingerprint], m: usize) -> Vec<f64> {
    fingerprints
        .iter()
        .flat_map(|fp| {
            let col = fp.angular_power.column(m);
            let peak = col.iter().copied().fold(0.0, f64::max);
            col.iter()
                .map(move |v| if peak > 0.0 { 2.0 * v / peak - 1.0 } else { -1.0 })
                .collect::<Vec<_>>()
        })
        .collect()
}

pub fn design_state(design: StateDesign, fingerprints: &[Fingerprint], m: usize, scale: &RssScale) -> Vec<f64> {
    match design {
        StateDesign::Rss => stage1_state(fingerprints, m, scale),
        StateDesign::Aoa => aoa_state(fingerprints, m),
        StateDesign::Jar => {
            let mut s = stage1_state(fingerprints, m, scale);
            s.extend(aoa_state(fingerprints, m));
            s
        }
    }
}

/// Stage-2 observation: stage-1 angles scaled to `[-1, 1]`.
pub fn stage2_state(angles: &[f64]) -> Vec<f64> {
    angles.iter().map(|a| a / PI).collect()
}

/// Position each AP's polar estimate points at (AP-major).
pub fn hypotheses(layout: &Layout, polar: &[Polar], config: &SystemConfig) -> Vec<Point> {
    let k_count = layout.num_ues();
    polar
        .iter()
        .enumerate()
        .map(|(i, p)| polar_to_position(layout.ap_positions[i / k_count], p.distance, p.angle, config.area_side))
        .collect()
}

/// `r_m = -sum_k rss_similarity(Psi_k, Psi_hat_{k,m})`; lies in `[-K, 0]`.
pub fn stage1_reward(scene: &Scene, config: &SystemConfig, polar: &[Polar]) -> Vec<f64> {
    let (m_count, k_count) = (scene.num_aps(), scene.num_ues());
    let hyps = hypotheses(&scene.layout, polar, config);
    let psi: Vec<Array1<f64>> = scene.fingerprints.iter().map(|f| f.rss.clone()).collect();
    (0..m_count)
        .map(|m| {
            let psi_hat: Vec<Array1<f64>> = (0..k_count)
                .map(|k| forward_rss(hyps[m * k_count + k], &scene.layout, config))
                .collect();
            -rss_similarity_all(&psi, &psi_hat).iter().sum::<f64>()
        })
        .collect()
}

/// `r_m = sum_k joint_similarity(Theta_k, Psi_k, Theta_hat_{k,m}, Psi_hat_{k,m})`.
pub fn stage2_reward(scene: &Scene, config: &SystemConfig, polar: &[Polar]) -> Result<Vec<f64>> {
    let (m_count, k_count) = (scene.num_aps(), scene.num_ues());
    let hyps = hypotheses(&scene.layout, polar, config);
    let psi: Vec<Array1<f64>> = scene.fingerprints.iter().map(|f| f.rss.clone()).collect();
    let dft = dft_matrix(config.antennas_per_ap);
    (0..m_count)
        .map(|m| {
            let own = &hyps[m * k_count..(m + 1) * k_count];
            let psi_hat: Vec<Array1<f64>> = own.iter().map(|&h| forward_rss(h, &scene.layout, config)).collect();
            let rss = rss_similarity_all(&psi, &psi_hat);
            let mut total = 0.0;
            for (k, &h) in own.iter().enumerate() {
                let theta_hat = forward_aoa_with(&dft, h, &scene.layout, config);
                let aoa = aoa_similarity(scene.fingerprints[k].angular_power.view(), theta_hat.view())?;
                total += joint_from_parts(aoa, rss[k]);
            }
            Ok(total)
        })
        .collect()
}

/// Fuses per-AP hypotheses into one position per UE, weighting AP `m` by `psi_mk`.
pub fn fuse_scene(scene: &Scene, hyps: &[Point], config: &SystemConfig) -> Result<Vec<Point>> {
    let (m_count, k_count) = (scene.num_aps(), scene.num_ues());
    (0..k_count)
        .map(|k| {
            let cands: Vec<Point> = (0..m_count).map(|m| hyps[m * k_count + k]).collect();
            let weights: Vec<f64> = scene.fingerprints[k].rss.to_vec();
            fuse_estimates(&cands, &weights, config.area_side)
        })
        .collect()
}

pub fn scene_rmse(scene: &Scene, polar: &[Polar], config: &SystemConfig) -> Result<f64> {
    let hyps = hypotheses(&scene.layout, polar, config);
    let fused = fuse_scene(scene, &hyps, config)?;
    rmse(&scene.layout.ue_positions, &fused, config.area_side)
}

/// Result of one joint environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub rewards: Vec<f64>,
    pub next_states: Vec<Vec<f64>>,
    /// Positioning error of the fused estimates implied by the actions.
    pub rmse: f64,
}

/// Multi-agent environment with a fixed number of agents and per-agent dims.
pub trait MultiAgentEnv {
    fn num_agents(&self) -> usize;
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// Draws a fresh scene and returns every agent's observation.
    fn reset(&mut self, rng: &mut SimRng) -> Result<Vec<Vec<f64>>>;
    fn step(&mut self, actions: &[Vec<f64>]) -> Result<Step>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    /// Negated sum of normalised RSS dissimilarities (stage 1).
    RssSimilarity,
    /// Sum of joint AOA/RSS similarities (stage 2).
    Joint,
}

fn not_reset() -> Error {
    Error::DegenerateConfig("environment stepped before reset".into())
}

/// Preliminary positioning: actors emit `(d, theta)` per UE.
///
/// With `StateDesign::Rss` and `RewardKind::RssSimilarity` this is stage 1;
/// the other designs back the state-design comparison.
#[derive(Debug, Clone)]
pub struct PreliminaryEnv {
    config: SystemConfig,
    blocks: usize,
    design: StateDesign,
    reward: RewardKind,
    scale: RssScale,
    bounds: ActionBounds,
    scene: Option<Scene>,
    states: Vec<Vec<f64>>,
}

impl PreliminaryEnv {
    pub fn new(config: &SystemConfig, blocks: usize, design: StateDesign, reward: RewardKind) -> Self {
        PreliminaryEnv {
            config: config.clone(),
            blocks,
            design,
            reward,
            scale: RssScale::for_config(config),
            bounds: ActionBounds::for_config(config),
            scene: None,
            states: Vec::new(),
        }
    }

    pub fn stage1(config: &SystemConfig, blocks: usize) -> Self {
        Self::new(config, blocks, StateDesign::Rss, RewardKind::RssSimilarity)
    }

    pub fn scene(&self) -> Option<&Scene> {
        self.scene.as_ref()
    }

    /// Installs a specific scene (used by tests and evaluation).
    pub fn set_scene(&mut self, scene: Scene) -> Vec<Vec<f64>> {
        self.states = (0..scene.num_aps())
            .map(|m| design_state(self.design, &scene.fingerprints, m, &self.scale))
            .collect();
        self.scene = Some(scene);
        self.states.clone()
    }
}

impl MultiAgentEnv for PreliminaryEnv {
    fn num_agents(&self) -> usize {
        self.config.num_aps
    }

    fn state_dim(&self) -> usize {
        self.design.state_dim(self.config.num_ues, self.config.antennas_per_ap)
    }

    fn action_dim(&self) -> usize {
        2 * self.config.num_ues
    }

    fn reset(&mut self, rng: &mut SimRng) -> Result<Vec<Vec<f64>>> {
        let scene = Scene::draw(&self.config, self.blocks, rng)?;
        Ok(self.set_scene(scene))
    }

    fn step(&mut self, actions: &[Vec<f64>]) -> Result<Step> {
        let scene = self.scene.as_ref().ok_or_else(not_reset)?;
        let polar: Vec<Polar> = actions.iter().flat_map(|a| self.bounds.decode_preliminary(a)).collect();
        let rewards = match self.reward {
            RewardKind::RssSimilarity => stage1_reward(scene, &self.config, &polar),
            RewardKind::Joint => stage2_reward(scene, &self.config, &polar)?,
        };
        Ok(Step {
            rewards,
            next_states: self.states.clone(),
            rmse: scene_rmse(scene, &polar, &self.config)?,
        })
    }
}

/// Angle correction: observes frozen stage-1 angle estimates and emits
/// bounded per-UE angle corrections.
#[derive(Debug, Clone)]
pub struct CorrectionEnv {
    config: SystemConfig,
    blocks: usize,
    design: StateDesign,
    stage1: AgentSet,
    scale: RssScale,
    bounds: ActionBounds,
    scene: Option<Scene>,
    base: Vec<Polar>,
    states: Vec<Vec<f64>>,
}

impl CorrectionEnv {
    pub fn new(config: &SystemConfig, blocks: usize, stage1: &AgentSet, design: StateDesign) -> Result<Self> {
        if stage1.num_agents() != config.num_aps
            || stage1.action_dim() != 2 * config.num_ues
            || stage1.state_dim() != design.state_dim(config.num_ues, config.antennas_per_ap)
        {
            return Err(Error::DimensionMismatch {
                context: "CorrectionEnv stage-1 agents",
                expected: config.num_aps,
                got: stage1.num_agents(),
            });
        }
        Ok(CorrectionEnv {
            config: config.clone(),
            blocks,
            design,
            stage1: stage1.clone(),
            scale: RssScale::for_config(config),
            bounds: ActionBounds::for_config(config),
            scene: None,
            base: Vec::new(),
            states: Vec::new(),
        })
    }

    pub fn set_scene(&mut self, scene: Scene) -> Result<Vec<Vec<f64>>> {
        let k_count = scene.num_ues();
        let mut base = Vec::with_capacity(scene.num_aps() * k_count);
        let mut states = Vec::with_capacity(scene.num_aps());
        for m in 0..scene.num_aps() {
            let s = design_state(self.design, &scene.fingerprints, m, &self.scale);
            let polar = self.bounds.decode_preliminary(&self.stage1.act(m, &s)?);
            states.push(stage2_state(&polar.iter().map(|p| p.angle).collect::<Vec<_>>()));
            base.extend(polar);
        }
        self.base = base;
        self.states = states;
        self.scene = Some(scene);
        Ok(self.states.clone())
    }

    /// Stage-1 estimates for the current scene.
    pub fn base_estimates(&self) -> &[Polar] {
        &self.base
    }
}

impl MultiAgentEnv for CorrectionEnv {
    fn num_agents(&self) -> usize {
        self.config.num_aps
    }

    fn state_dim(&self) -> usize {
        self.config.num_ues
    }

    fn action_dim(&self) -> usize {
        self.config.num_ues
    }

    fn reset(&mut self, rng: &mut SimRng) -> Result<Vec<Vec<f64>>> {
        let scene = Scene::draw(&self.config, self.blocks, rng)?;
        self.set_scene(scene)
    }

    fn step(&mut self, actions: &[Vec<f64>]) -> Result<Step> {
        let scene = self.scene.as_ref().ok_or_else(not_reset)?;
        let k_count = scene.num_ues();
        let mut polar = self.base.clone();
        for (m, a) in actions.iter().enumerate() {
            for (k, delta) in self.bounds.decode_correction(a).into_iter().enumerate() {
                let p = &mut polar[m * k_count + k];
                p.angle = wrap_angle(p.angle + delta);
            }
        }
        Ok(Step {
            rewards: stage2_reward(scene, &self.config, &polar)?,
            next_states: self.states.clone(),
            rmse: scene_rmse(scene, &polar, &self.config)?,
        })
    }
}
