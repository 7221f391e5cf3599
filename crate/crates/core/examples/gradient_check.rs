//! Compares the analytic actor gradient (through the centralized critic)
//! with central finite differences.

use cfloc::approx::{Activation, AgentNet};
use cfloc::marl::actor_gradient;
use cfloc::seeded_rng;
use ndarray::Array2;
use rand::Rng;

fn main() -> cfloc::Result<()> {
    let mut rng = seeded_rng(6);
    let actor = AgentNet::new(&[3, 16, 2], Activation::Tanh, &mut rng);
    let critic = AgentNet::new(&[10, 16, 1], Activation::Identity, &mut rng);
    let input = Array2::from_shape_fn((5, 10), |_| rng.random_range(-1.0..1.0));
    let own = Array2::from_shape_fn((5, 3), |_| rng.random_range(-1.0..1.0));
    let offset = 8;
    let (grads, _) = actor_gradient(&actor, &critic, input.view(), own.view(), offset)?;

    let objective = |net: &AgentNet| -> f64 {
        let mut x = input.clone();
        let a = net.forward_batch(own.view()).unwrap();
        x.slice_mut(ndarray::s![.., offset..offset + 2]).assign(&a);
        -critic.forward_batch(x.view()).unwrap().mean().unwrap()
    };
    let params = actor.flat_params();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    let mut probe = actor.clone();
    for (i, g) in grads.flat().iter().enumerate() {
        let mut p = params.clone();
        p[i] += h;
        probe.set_flat_params(&p)?;
        let up = objective(&probe);
        p[i] -= 2.0 * h;
        probe.set_flat_params(&p)?;
        let fd = (up - objective(&probe)) / (2.0 * h);
        worst = worst.max((g - fd).abs() / g.abs().max(fd.abs()).max(1e-6));
    }
    println!("{} parameters, max relative error {worst:.2e}", params.len());
    Ok(())
}
