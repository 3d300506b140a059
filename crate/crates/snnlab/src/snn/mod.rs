//! Discrete-time LIF neuron dynamics, spike generation and layer forward
//! passes.

mod conv;
mod lif;
mod network;

pub use conv::{conv2d_backward_input, conv2d_backward_kernel, conv2d_forward};
pub use lif::{heaviside_spike, lif_step, LayerState, LifParams, ResetMode};
pub use network::{forward_pass, InputShape, LayerSpec, NetworkSpec};

pub(crate) use network::layer_drive;
