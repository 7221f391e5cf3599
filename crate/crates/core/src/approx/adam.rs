use super::net::{AgentNet, Dense, Gradients};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_rate(learning_rate: f64) -> Self {
        AdamConfig {
            learning_rate,
            ..AdamConfig::default()
        }
    }
}

/// Adam moment accumulators for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: AdamConfig,
    pub(crate) step: u64,
    pub(crate) first: Vec<Dense>,
    pub(crate) second: Vec<Dense>,
}

impl OptimizerState {
    pub fn new(net: &AgentNet, config: AdamConfig) -> Self {
        let zeros = || {
            net.layers()
                .iter()
                .map(|d| Dense::zeros(d.inputs(), d.outputs()))
                .collect::<Vec<_>>()
        };
        OptimizerState {
            config,
            step: 0,
            first: zeros(),
            second: zeros(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam descent step along `grads`.
    ///
    /// Returns `Ok(false)` without touching anything if a gradient is not finite.
    pub fn step(&mut self, net: &mut AgentNet, grads: &Gradients) -> Result<bool> {
        if grads.layers.len() != net.layers().len()
            || grads
                .layers
                .iter()
                .zip(net.layers())
                .any(|(g, d)| g.weights.dim() != d.weights.dim() || g.bias.len() != d.bias.len())
        {
            return Err(Error::DimensionMismatch {
                context: "OptimizerState::step",
                expected: net.num_params(),
                got: grads.layers.iter().map(|d| d.weights.len() + d.bias.len()).sum(),
            });
        }
        if !grads.is_finite() {
            return Ok(false);
        }
        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        let layers = net.layers_mut();
        for (((d, g), m), v) in layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            for (((p, g), m), v) in d
                .slices_mut()
                .into_iter()
                .zip(g.slices())
                .zip(m.slices_mut())
                .zip(v.slices_mut())
            {
                for i in 0..p.len() {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                    let update = learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + epsilon);
                    if update.is_finite() {
                        p[i] -= update;
                    }
                }
            }
        }
        Ok(true)
    }
}
