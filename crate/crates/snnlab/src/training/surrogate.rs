use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Arctan surrogate used in place of the Heaviside derivative during the
/// backward pass. `slope` is the sharpness; the derivative peaks at `slope`
/// when u = theta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurrogateSpec {
    pub slope: f64,
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        // The sharpness is a free knob; 2.0 is a common choice and results
        // downstream are not sensitive to it.
        SurrogateSpec { slope: 2.0 }
    }
}

/// d/du [ (1/pi) atan(pi * slope * (u - theta)) + 1/2 ]
///   = slope / (1 + (pi * slope * (u - theta))^2)
pub fn surrogate_grad(u: f64, theta: f64, spec: &SurrogateSpec) -> f64 {
    let z = PI * spec.slope * (u - theta);
    spec.slope / (1.0 + z * z)
}

/// The smoothed step whose derivative is `surrogate_grad`; used as the
/// forward activation in gradient-check mode.
pub fn smoothed_step(u: f64, theta: f64, spec: &SurrogateSpec) -> f64 {
    (PI * spec.slope * (u - theta)).atan() / PI + 0.5
}
