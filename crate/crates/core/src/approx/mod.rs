//! Small fully connected approximators for actors and critics, with exact
//! reverse-mode gradients, Adam, soft target updates and a binary container.

mod adam;
pub mod container;
mod net;

pub use adam::{AdamConfig, OptimizerState};
pub use net::{soft_update, Activation, AgentNet, Dense, ForwardTrace, Gradients};
