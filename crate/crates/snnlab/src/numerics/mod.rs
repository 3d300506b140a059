//! Deterministic sampling, special functions, descriptive statistics and
//! dense matrix primitives shared by every other module.

mod erf;
mod linalg;
mod rng;
mod stats;

pub use erf::{erf, erfc, std_normal_tail};
pub use linalg::{Matrix, Tensor4};
pub use rng::Rng;
pub use stats::{describe, StatsSummary};
