use rand::Rng;

use super::env::{design_state, fuse_scene, hypotheses, stage2_state, ActionBounds, RssScale, Scene, StateDesign};
use super::maddpg::AgentSet;
use crate::error::{Error, Result};
use crate::locate::{rmse, Polar, PositionEstimate};
use crate::sysmodel::{wrap_angle, wrap_delta, Point, SystemConfig};
use crate::SimRng;

/// Anything that turns a scene's fingerprints into per-AP polar estimates
/// (AP-major, `m * K + k`).
pub trait Positioner {
    fn estimate(&self, scene: &Scene, config: &SystemConfig, rng: &mut SimRng) -> Result<Vec<Polar>>;
}

/// Trained agents: noiseless stage-1 actors, optionally followed by stage-2 corrections.
#[derive(Debug, Clone)]
pub struct DcpAgents {
    pub stage1: AgentSet,
    pub stage2: Option<AgentSet>,
    pub design: StateDesign,
}

impl DcpAgents {
    pub fn new(stage1: AgentSet, stage2: Option<AgentSet>) -> Self {
        DcpAgents {
            stage1,
            stage2,
            design: StateDesign::Rss,
        }
    }
}

impl Positioner for DcpAgents {
    fn estimate(&self, scene: &Scene, config: &SystemConfig, _rng: &mut SimRng) -> Result<Vec<Polar>> {
        if self.stage1.num_agents() != scene.num_aps() {
            return Err(Error::DimensionMismatch {
                context: "DcpAgents stage-1 agents",
                expected: scene.num_aps(),
                got: self.stage1.num_agents(),
            });
        }
        let scale = RssScale::for_config(config);
        let bounds = ActionBounds::for_config(config);
        let k_count = scene.num_ues();
        let mut out = Vec::with_capacity(scene.num_aps() * k_count);
        for m in 0..scene.num_aps() {
            let s = design_state(self.design, &scene.fingerprints, m, &scale);
            let mut polar = bounds.decode_preliminary(&self.stage1.act(m, &s)?);
            if let Some(stage2) = &self.stage2 {
                let angles: Vec<f64> = polar.iter().map(|p| p.angle).collect();
                let delta = bounds.decode_correction(&stage2.act(m, &stage2_state(&angles))?);
                for (p, d) in polar.iter_mut().zip(delta) {
                    p.angle = wrap_angle(p.angle + d);
                }
            }
            out.extend(polar);
        }
        Ok(out)
    }
}

/// Reports the true polar coordinates of every link.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleAgents;

impl Positioner for OracleAgents {
    fn estimate(&self, scene: &Scene, _config: &SystemConfig, _rng: &mut SimRng) -> Result<Vec<Polar>> {
        Ok(scene
            .layout
            .links()
            .iter()
            .map(|l| Polar {
                distance: l.horizontal_distance,
                angle: l.nominal_aoa,
            })
            .collect())
    }
}

/// Each AP points at an independent uniformly drawn position in the area.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomAgents;

impl Positioner for RandomAgents {
    fn estimate(&self, scene: &Scene, config: &SystemConfig, rng: &mut SimRng) -> Result<Vec<Polar>> {
        let side = config.area_side;
        let mut out = Vec::with_capacity(scene.num_aps() * scene.num_ues());
        for &ap in &scene.layout.ap_positions {
            for _ in 0..scene.num_ues() {
                let target = Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side);
                let (dx, dy) = wrap_delta(ap, target, side);
                out.push(Polar {
                    distance: dx.hypot(dy),
                    angle: dy.atan2(dx),
                });
            }
        }
        Ok(out)
    }
}

/// Runs a positioner on one scene and fuses its per-AP estimates.
pub fn locate_scene<P: Positioner + ?Sized>(
    positioner: &P,
    scene: &Scene,
    config: &SystemConfig,
    rng: &mut SimRng,
) -> Result<PositionEstimate> {
    let polar = positioner.estimate(scene, config, rng)?;
    let hyps = hypotheses(&scene.layout, &polar, config);
    let fused = fuse_scene(scene, &hyps, config)?;
    Ok(PositionEstimate {
        num_ues: scene.num_ues(),
        polar,
        fused,
    })
}

/// Mean over `n_layouts` fresh scenes of the per-scene RMSE.
pub fn evaluate<P: Positioner + ?Sized>(
    positioner: &P,
    n_layouts: usize,
    config: &SystemConfig,
    blocks: usize,
    rng: &mut SimRng,
) -> Result<f64> {
    if n_layouts == 0 {
        return Err(Error::EmptySamples("evaluation layouts"));
    }
    let mut total = 0.0;
    for _ in 0..n_layouts {
        let scene = Scene::draw(config, blocks, rng)?;
        let est = locate_scene(positioner, &scene, config, rng)?;
        total += rmse(&scene.layout.ue_positions, &est.fused, config.area_side)?;
    }
    Ok(total / n_layouts as f64)
}
