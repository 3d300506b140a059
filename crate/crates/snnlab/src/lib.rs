//! Spiking neural network experimentation toolkit.
//!
//! Provides deterministic numerics, discrete-time LIF dynamics, a registry of
//! weight-initialization schemes (including a variance-conserving scheme for
//! spiking activations), depth-by-time propagation experiments, and a
//! surrogate-gradient BPTT training engine with MNIST/FMNIST ingestion.

pub mod cli;
pub mod data;
pub mod error;
pub mod init;
pub mod numerics;
pub mod propagation;
pub mod snn;
pub mod training;

pub use error::{Error, Result};
