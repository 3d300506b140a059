//! Surrogate-gradient BPTT training engine: reverse-mode differentiation
//! through unrolled LIF dynamics, spike-count cross-entropy, Adam with
//! cosine annealing, and a finite-difference gradient-check mode.

mod adam;
mod engine;
mod gradcheck;
mod loss;
mod surrogate;
mod trainer;

pub use adam::{adam_step, AdamState};
pub use engine::{bptt_backward, forward_unrolled, ForwardMode, Trajectory};
pub use gradcheck::{gradcheck_suite, GradcheckReport};
pub use loss::spike_count_cross_entropy;
pub use surrogate::{smoothed_step, surrogate_grad, SurrogateSpec};
pub use trainer::{cosine_lr, train, EpochRecord, LrSchedule, TrainConfig, TrainLog};
