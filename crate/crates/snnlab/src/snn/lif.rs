use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the membrane potential reacts to the neuron's own previous spike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetMode {
    /// Subtract theta at the step after a spike; the reset term is not
    /// scaled by the leak factor.
    Soft,
    /// Zero the membrane before leaking if the neuron spiked last step.
    Hard,
    /// No reset; used for the single-step depth analysis where the network
    /// has no spiking history.
    None,
}

/// LIF neuron hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifParams {
    /// Leak factor in [0, 1].
    pub beta: f64,
    /// Firing threshold; theta = 0 is allowed (ReLU-support equivalence).
    pub theta: f64,
    pub reset: ResetMode,
}

impl LifParams {
    pub fn new(beta: f64, theta: f64, reset: ResetMode) -> Result<Self> {
        let p = LifParams { beta, theta, reset };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Parameter(format!(
                "beta must lie in [0, 1], got {}",
                self.beta
            )));
        }
        if !self.theta.is_finite() || self.theta < 0.0 {
            return Err(Error::Parameter(format!(
                "theta must be finite and >= 0, got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

impl Default for LifParams {
    fn default() -> Self {
        LifParams {
            beta: 0.5,
            theta: 1.0,
            reset: ResetMode::Soft,
        }
    }
}

/// Membrane potentials and the spikes emitted at the previous step.
/// Spike entries are stored as f64 but are always exactly 0.0 or 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerState {
    pub u: Vec<f64>,
    pub x_prev: Vec<f64>,
}

impl LayerState {
    pub fn zeros(width: usize) -> Self {
        LayerState {
            u: vec![0.0; width],
            x_prev: vec![0.0; width],
        }
    }

    pub fn width(&self) -> usize {
        self.u.len()
    }
}

/// Elementwise threshold: 1 iff u > theta (strict; a tie does not spike).
pub fn heaviside_spike(u: &[f64], theta: f64) -> Vec<f64> {
    u.iter().map(|&v| if v > theta { 1.0 } else { 0.0 }).collect()
}

/// One discrete LIF update. `drive` is the feedforward input w_l x_l for this
/// step. Soft reset: u_new = drive + beta*u_old - x_prev*theta. Returns the
/// spikes emitted this step; the state is advanced in place.
pub fn lif_step(state: &mut LayerState, drive: &[f64], params: &LifParams) -> Result<Vec<f64>> {
    if drive.len() != state.u.len() {
        return Err(Error::Shape(format!(
            "lif_step: state width {} vs drive length {}",
            state.u.len(),
            drive.len()
        )));
    }
    for i in 0..state.u.len() {
        let mut u_old = state.u[i];
        match params.reset {
            ResetMode::Soft => {
                state.u[i] = drive[i] + params.beta * u_old - state.x_prev[i] * params.theta;
            }
            ResetMode::Hard => {
                if state.x_prev[i] > 0.0 {
                    u_old = 0.0;
                }
                state.u[i] = drive[i] + params.beta * u_old;
            }
            ResetMode::None => {
                state.u[i] = drive[i] + params.beta * u_old;
            }
        }
    }
    let spikes = heaviside_spike(&state.u, params.theta);
    state.x_prev.copy_from_slice(&spikes);
    Ok(spikes)
}
