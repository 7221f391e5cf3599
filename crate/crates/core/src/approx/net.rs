use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Identity => z.clone(),
            Activation::Relu => z.mapv(|v| v.max(0.0)),
            Activation::Tanh => z.mapv(f64::tanh),
        }
    }

    /// Multiplies `grad` in place by the derivative at pre-activation `z`
    /// (`out` is the activation output).
    fn chain(self, grad: &mut Array2<f64>, z: &Array2<f64>, out: &Array2<f64>) {
        match self {
            Activation::Identity => {}
            Activation::Relu => grad.zip_mut_with(z, |g, &v| {
                if v <= 0.0 {
                    *g = 0.0
                }
            }),
            Activation::Tanh => grad.zip_mut_with(out, |g, &y| *g *= 1.0 - y * y),
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
            Activation::Tanh => 2,
        }
    }

    pub(crate) fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            2 => Some(Activation::Tanh),
            _ => None,
        }
    }
}

/// Affine layer; weights are stored `inputs x outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            weights: Array2::zeros((inputs, outputs)),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.ncols()
    }

    pub(crate) fn slices(&self) -> [&[f64]; 2] {
        [
            self.weights.as_slice().expect("standard layout"),
            self.bias.as_slice().expect("standard layout"),
        ]
    }

    pub(crate) fn slices_mut(&mut self) -> [&mut [f64]; 2] {
        [
            self.weights.as_slice_mut().expect("standard layout"),
            self.bias.as_slice_mut().expect("standard layout"),
        ]
    }
}

/// Parameter gradients, shaped like the network's layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|d| d.slices().into_iter().flatten().copied().collect::<Vec<_>>())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|d| d.slices().iter().all(|s| s.iter().all(|v| v.is_finite())))
    }

    pub fn scale(&mut self, factor: f64) {
        for d in &mut self.layers {
            for s in d.slices_mut() {
                s.iter_mut().for_each(|v| *v *= factor);
            }
        }
    }
}

/// Cached activations of one batched forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// Input to each layer (`layers.len()` entries).
    inputs: Vec<Array2<f64>>,
    /// Pre-activation of each layer.
    pre: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

/// Fully connected network: rectifier hidden layers and a role-specific output
/// activation (tanh for actors, identity for critics).
#[derive(Debug, Clone, PartialEq)]
pub struct AgentNet {
    layers: Vec<Dense>,
    output: Activation,
}

impl AgentNet {
    /// Fan-in scaled uniform initialisation, `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], output: Activation, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        let layers = sizes
            .windows(2)
            .map(|w| {
                let bound = 1.0 / (w[0] as f64).sqrt();
                let mut d = Dense::zeros(w[0], w[1]);
                for s in d.slices_mut() {
                    s.iter_mut().for_each(|v| *v = rng.random_range(-bound..bound));
                }
                d
            })
            .collect();
        AgentNet { layers, output }
    }

    /// Multiplies the last layer's weights and bias by `factor`.
    pub fn scale_output_layer(&mut self, factor: f64) {
        if let Some(last) = self.layers.last_mut() {
            last.weights.mapv_inplace(|v| v * factor);
            last.bias.mapv_inplace(|v| v * factor);
        }
    }

    pub fn zeros(sizes: &[usize], output: Activation) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output sizes");
        AgentNet {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
            output,
        }
    }

    /// Builds a network from explicit layers; consecutive dimensions must chain.
    pub fn from_layers(layers: Vec<Dense>, output: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "AgentNet::from_layers",
                expected: 1,
                got: 0,
            });
        }
        for w in layers.windows(2) {
            if w[0].outputs() != w[1].inputs() {
                return Err(Error::DimensionMismatch {
                    context: "AgentNet layer chain",
                    expected: w[0].outputs(),
                    got: w[1].inputs(),
                });
            }
            if w[0].bias.len() != w[0].outputs() {
                return Err(Error::DimensionMismatch {
                    context: "AgentNet bias",
                    expected: w[0].outputs(),
                    got: w[0].bias.len(),
                });
            }
        }
        Ok(AgentNet { layers, output })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Dense::outputs))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").outputs()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|d| d.weights.len() + d.bias.len()).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|d| d.slices().into_iter().flatten().copied().collect::<Vec<_>>())
            .collect()
    }

    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                context: "set_flat_params",
                expected: self.num_params(),
                got: values.len(),
            });
        }
        let mut it = values.iter();
        for d in &mut self.layers {
            for s in d.slices_mut() {
                s.iter_mut().for_each(|v| *v = *it.next().expect("length checked"));
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|d| d.slices().iter().all(|s| s.iter().all(|v| v.is_finite())))
    }

    fn activation_of(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output
        } else {
            Activation::Relu
        }
    }

    fn check_input(&self, got: usize) -> Result<()> {
        if got != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "AgentNet input",
                expected: self.input_dim(),
                got,
            });
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row vector");
        Ok(self.forward_batch(x)?.into_raw_vec_and_offset().0)
    }

    /// Forward pass over a `batch x inputs` matrix.
    pub fn forward_batch(&self, input: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(input.ncols())?;
        let mut x = input.to_owned();
        for (i, d) in self.layers.iter().enumerate() {
            let z = x.dot(&d.weights) + &d.bias;
            x = self.activation_of(i).apply(&z);
        }
        Ok(x)
    }

    pub fn forward_trace(&self, input: ArrayView2<f64>) -> Result<ForwardTrace> {
        self.check_input(input.ncols())?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut x = input.to_owned();
        for (i, d) in self.layers.iter().enumerate() {
            let z = x.dot(&d.weights) + &d.bias;
            let y = self.activation_of(i).apply(&z);
            inputs.push(x);
            pre.push(z);
            x = y;
        }
        Ok(ForwardTrace { inputs, pre, output: x })
    }

    /// Reverse pass: returns parameter gradients (summed over the batch) and
    /// the gradient with respect to the input.
    pub fn backward_from(&self, trace: &ForwardTrace, upstream: ArrayView2<f64>) -> Result<(Gradients, Array2<f64>)> {
        if upstream.dim() != trace.output.dim() {
            return Err(Error::DimensionMismatch {
                context: "AgentNet upstream gradient",
                expected: trace.output.len(),
                got: upstream.len(),
            });
        }
        let n = self.layers.len();
        let mut grads: Vec<Dense> = Vec::with_capacity(n);
        let mut delta = upstream.to_owned();
        let last_out = &trace.output;
        self.output.chain(&mut delta, &trace.pre[n - 1], last_out);
        for i in (0..n).rev() {
            let d = &self.layers[i];
            let weights = trace.inputs[i].t().dot(&delta).as_standard_layout().into_owned();
            let bias = delta.sum_axis(Axis(0));
            let dx = delta.dot(&d.weights.t());
            grads.push(Dense { weights, bias });
            delta = dx;
            if i > 0 {
                // The input of layer i is the rectified output of layer i-1.
                let out = &trace.inputs[i];
                Activation::Relu.chain(&mut delta, &trace.pre[i - 1], out);
            }
        }
        grads.reverse();
        Ok((Gradients { layers: grads }, delta))
    }

    /// Single-sample convenience over [`AgentNet::backward_from`].
    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        let x = ArrayView2::from_shape((1, input.len()), input).expect("row vector");
        let trace = self.forward_trace(x)?;
        let up = ArrayView2::from_shape((1, upstream.len()), upstream).expect("row vector");
        let (g, dx) = self.backward_from(&trace, up)?;
        Ok((g, dx.into_raw_vec_and_offset().0))
    }
}

/// `target <- tau * online + (1 - tau) * target`, elementwise.
pub fn soft_update(target: &mut AgentNet, online: &AgentNet, tau: f64) -> Result<()> {
    if target.layer_sizes() != online.layer_sizes() {
        return Err(Error::DimensionMismatch {
            context: "soft_update",
            expected: online.num_params(),
            got: target.num_params(),
        });
    }
    for (t, o) in target.layers.iter_mut().zip(&online.layers) {
        t.weights
            .zip_mut_with(&o.weights, |a, &b| *a = tau * b + (1.0 - tau) * *a);
        t.bias.zip_mut_with(&o.bias, |a, &b| *a = tau * b + (1.0 - tau) * *a);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use ndarray::array;

    #[test]
    fn zero_net_outputs_zero() {
        let net = AgentNet::zeros(&[3, 5, 2], Activation::Identity);
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer_passes_input() {
        let d = Dense {
            weights: Array2::eye(3),
            bias: Array1::zeros(3),
        };
        let net = AgentNet::from_layers(vec![d], Activation::Identity).unwrap();
        assert_eq!(net.forward(&[1.5, -2.0, 0.25]).unwrap(), vec![1.5, -2.0, 0.25]);
    }

    #[test]
    fn tanh_output_is_bounded() {
        let mut rng = seeded_rng(2);
        let net = AgentNet::new(&[4, 16, 3], Activation::Tanh, &mut rng);
        let out = net.forward(&[100.0, -50.0, 30.0, 7.0]).unwrap();
        assert!(out.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let net = AgentNet::zeros(&[3, 2], Activation::Identity);
        assert!(matches!(
            net.forward(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 1,
                ..
            })
        ));
        let bad = vec![Dense::zeros(2, 3), Dense::zeros(4, 1)];
        assert!(AgentNet::from_layers(bad, Activation::Identity).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = seeded_rng(5);
        let net = AgentNet::new(&[3, 8, 8, 2], Activation::Tanh, &mut rng);
        let (g, dx) = net.backward(&[0.3, -0.1, 0.9], &[0.0, 0.0]).unwrap();
        assert!(g.flat().iter().all(|v| *v == 0.0));
        assert!(dx.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_net_input_gradient_is_scale_free() {
        let mut rng = seeded_rng(6);
        let net = AgentNet::new(&[3, 2], Activation::Identity, &mut rng);
        let (_, a) = net.backward(&[1.0, 2.0, 3.0], &[1.0, -1.0]).unwrap();
        let (_, b) = net.backward(&[10.0, 20.0, 30.0], &[1.0, -1.0]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn soft_update_cases() {
        let mut rng = seeded_rng(7);
        let online = AgentNet::new(&[2, 4, 1], Activation::Identity, &mut rng);
        let mut target = AgentNet::new(&[2, 4, 1], Activation::Identity, &mut rng);
        soft_update(&mut target, &online, 1.0).unwrap();
        assert_eq!(target, online);
        let before = target.clone();
        soft_update(&mut target, &online, 0.3).unwrap();
        let drift = target
            .flat_params()
            .iter()
            .zip(before.flat_params())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-15);

        let mut t = AgentNet::from_layers(
            vec![Dense {
                weights: array![[0.0]],
                bias: array![0.0],
            }],
            Activation::Identity,
        )
        .unwrap();
        let o = AgentNet::from_layers(
            vec![Dense {
                weights: array![[1.0]],
                bias: array![1.0],
            }],
            Activation::Identity,
        )
        .unwrap();
        soft_update(&mut t, &o, 0.01).unwrap();
        assert!((t.layers()[0].weights[(0, 0)] - 0.01).abs() < 1e-15);
        let wrong = AgentNet::zeros(&[2, 1], Activation::Identity);
        assert!(soft_update(&mut t, &wrong, 0.5).is_err());
    }

    #[test]
    fn batch_and_single_forward_agree() {
        let mut rng = seeded_rng(8);
        let net = AgentNet::new(&[3, 6, 2], Activation::Tanh, &mut rng);
        let batch = array![[0.1, 0.2, 0.3], [-1.0, 0.5, 2.0]];
        let out = net.forward_batch(batch.view()).unwrap();
        for (i, r) in batch.rows().into_iter().enumerate() {
            let single = net.forward(r.as_slice().unwrap()).unwrap();
            for (a, b) in single.iter().zip(out.row(i).iter()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }
}
