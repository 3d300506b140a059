use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::init::WeightTensor;
use crate::numerics::Rng;
use crate::snn::NetworkSpec;
use crate::training::adam::{adam_step, AdamState};
use crate::training::engine::{bptt_backward, forward_unrolled, ForwardMode};
use crate::training::loss::spike_count_cross_entropy;
use crate::training::surrogate::SurrogateSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    CosineAnnealing,
    Constant,
}

/// Optimizer, schedule and loop settings for `train`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub t_steps: usize,
    pub lr: f64,
    pub schedule: LrSchedule,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    pub surrogate: SurrogateSpec,
    /// When true, the soft-reset term is excluded from the backward graph.
    pub detach_reset: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5,
            batch_size: 128,
            t_steps: 3,
            lr: 1e-3,
            schedule: LrSchedule::CosineAnnealing,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            surrogate: SurrogateSpec::default(),
            detach_reset: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 || self.t_steps < 1 || self.batch_size < 1 {
            return Err(Error::Parameter(
                "epochs, t_steps and batch_size must be >= 1".into(),
            ));
        }
        if !(self.lr >= 0.0) {
            return Err(Error::Parameter(format!("lr must be >= 0, got {}", self.lr)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: Option<f64>,
    pub lr: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
}

/// lr0 * 0.5 * (1 + cos(pi * epoch / total)).
pub fn cosine_lr(epoch: usize, total: usize, lr0: f64) -> Result<f64> {
    if epoch >= total {
        return Err(Error::Parameter(format!(
            "cosine_lr: epoch {epoch} out of range for {total} epochs"
        )));
    }
    let lr = lr0 * 0.5 * (1.0 + (std::f64::consts::PI * epoch as f64 / total as f64).cos());
    Ok(lr.max(0.0))
}

/// Forward-only evaluation: mean loss and accuracy over the dataset.
pub fn evaluate(
    net: &NetworkSpec,
    weights: &[WeightTensor],
    dataset: &Dataset,
    t_steps: usize,
    batch_size: usize,
    surrogate: &SurrogateSpec,
) -> Result<(f64, f64)> {
    let n = dataset.len();
    let mut loss_sum = 0.0;
    let mut correct_weighted = 0.0;
    let mut start = 0;
    while start < n {
        let end = (start + batch_size).min(n);
        let (input, labels) = dataset.rows(start, end)?;
        let traj = forward_unrolled(net, weights, &input, t_steps, ForwardMode::Spiking, surrogate)?;
        let (loss, _, acc) = spike_count_cross_entropy(&traj.logits, &labels)?;
        let b = (end - start) as f64;
        loss_sum += loss * b;
        correct_weighted += acc * b;
        start = end;
    }
    Ok((loss_sum / n as f64, correct_weighted / n as f64))
}

/// Full training loop: seeded shuffle per epoch, T-step spiking forward,
/// spike-count cross-entropy, BPTT, Adam, schedule. `weights` are updated
/// in place. `eval` is scored at the end of every epoch when given.
pub fn train(
    net: &NetworkSpec,
    weights: &mut [WeightTensor],
    config: &TrainConfig,
    dataset: &Dataset,
    eval: Option<&Dataset>,
) -> Result<TrainLog> {
    config.validate()?;
    net.validate()?;
    if dataset.len() == 0 {
        return Err(Error::Data("training dataset is empty".into()));
    }
    let sizes: Vec<usize> = weights.iter().map(|w| w.num_params()).collect();
    let mut adam = AdamState::new(&sizes, config.adam_beta1, config.adam_beta2, config.adam_eps);
    let shuffle_root = Rng::from_seed(config.seed);
    let mut log = TrainLog::default();
    for epoch in 0..config.epochs {
        let started = Instant::now();
        let lr = match config.schedule {
            LrSchedule::CosineAnnealing => cosine_lr(epoch, config.epochs, config.lr)?,
            LrSchedule::Constant => config.lr,
        };
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        shuffle_root.substream(epoch as u64).shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut acc_sum = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let (input, labels) = dataset.gather(chunk)?;
            let traj = forward_unrolled(
                net,
                weights,
                &input,
                config.t_steps,
                ForwardMode::Spiking,
                &config.surrogate,
            )?;
            let (loss, dlogits, acc) = spike_count_cross_entropy(&traj.logits, &labels)?;
            let grads = bptt_backward(
                net,
                weights,
                &input,
                &traj,
                &dlogits,
                &config.surrogate,
                config.detach_reset,
            )?;
            {
                let grad_refs: Vec<&[f64]> = grads.iter().map(|g| g.as_slice()).collect();
                let mut param_refs: Vec<&mut [f64]> =
                    weights.iter_mut().map(|w| w.values_mut()).collect();
                adam_step(&mut param_refs, &grad_refs, &mut adam, lr)?;
            }
            let b = chunk.len() as f64;
            loss_sum += loss * b;
            acc_sum += acc * b;
            seen += chunk.len();
        }
        let test_accuracy = match eval {
            Some(ds) => Some(
                evaluate(net, weights, ds, config.t_steps, config.batch_size, &config.surrogate)?.1,
            ),
            None => None,
        };
        log.epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / seen as f64,
            train_accuracy: acc_sum / seen as f64,
            test_accuracy,
            lr,
            wall_time_s: started.elapsed().as_secs_f64(),
        });
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::init::{initialize_network, InitScheme};
    use crate::numerics::Matrix;
    use crate::snn::{LifParams, ResetMode};

    fn toy_dataset(n: usize, features: usize, classes: usize, seed: u64) -> Dataset {
        // Two-cluster synthetic data: class c has mean direction +/- on a
        // class-specific coordinate block, easily separable.
        let mut rng = Rng::from_seed(seed);
        let mut images = Vec::with_capacity(n * features);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let c = i % classes;
            for f in 0..features {
                let bias = if f % classes == c { 1.5 } else { -0.3 };
                images.push(bias + 0.3 * rng.standard_normal());
            }
            labels.push(c);
        }
        Dataset::from_parts(Matrix::from_vec(n, features, images).unwrap(), labels).unwrap()
    }

    #[test]
    fn cosine_schedule_values() {
        assert_eq!(cosine_lr(0, 150, 1e-3).unwrap(), 1e-3);
        assert!((cosine_lr(75, 150, 1e-3).unwrap() - 5e-4).abs() < 1e-15);
        let last = cosine_lr(149, 150, 1e-3).unwrap();
        assert!((last - 1.097e-7).abs() < 1e-9, "last {last}");
        assert!(cosine_lr(150, 150, 1e-3).is_err());
    }

    #[test]
    fn cosine_schedule_non_increasing() {
        let mut prev = f64::INFINITY;
        for e in 0..40 {
            let lr = cosine_lr(e, 40, 1e-3).unwrap();
            assert!(lr <= prev);
            prev = lr;
        }
    }

    #[test]
    fn zero_lr_is_a_no_op() {
        let lif = LifParams::new(0.5, 1.0, ResetMode::Soft).unwrap();
        let net = NetworkSpec::mlp(8, 10, 1, 4, lif);
        let mut weights = initialize_network(&net, &InitScheme::Proposed, 2).unwrap();
        let before = weights.clone();
        let ds = toy_dataset(32, 8, 4, 6);
        let config = TrainConfig {
            epochs: 1,
            batch_size: 8,
            lr: 0.0,
            schedule: LrSchedule::Constant,
            ..TrainConfig::default()
        };
        let log = train(&net, &mut weights, &config, &ds, None).unwrap();
        assert_eq!(weights, before);
        let (_, acc) = evaluate(&net, &weights, &ds, 3, 8, &SurrogateSpec::default()).unwrap();
        // untrained accuracy is whatever it is, but the log must agree with it
        assert!((log.epochs[0].train_accuracy - acc).abs() < 1e-12);
    }

    #[test]
    fn training_is_deterministic() {
        let lif = LifParams::new(0.5, 1.0, ResetMode::Soft).unwrap();
        let net = NetworkSpec::mlp(8, 12, 1, 4, lif);
        let ds = toy_dataset(64, 8, 4, 9);
        let config = TrainConfig {
            epochs: 2,
            batch_size: 16,
            ..TrainConfig::default()
        };
        let run = || {
            let mut weights = initialize_network(&net, &InitScheme::Proposed, 5).unwrap();
            train(&net, &mut weights, &config, &ds, Some(&ds)).map(|log| (log, weights))
        };
        let (log_a, w_a) = run().unwrap();
        let (log_b, w_b) = run().unwrap();
        assert_eq!(w_a, w_b);
        assert_eq!(log_a.epochs.len(), log_b.epochs.len());
        for (a, b) in log_a.epochs.iter().zip(log_b.epochs.iter()) {
            assert_eq!(a.train_loss, b.train_loss);
            assert_eq!(a.train_accuracy, b.train_accuracy);
            assert_eq!(a.test_accuracy, b.test_accuracy);
        }
    }

    #[test]
    fn learns_separable_toy_data() {
        let lif = LifParams::new(0.5, 1.0, ResetMode::Soft).unwrap();
        let net = NetworkSpec::mlp(12, 24, 1, 4, lif);
        let mut weights = initialize_network(&net, &InitScheme::Proposed, 3).unwrap();
        let ds = toy_dataset(256, 12, 4, 11);
        let config = TrainConfig {
            epochs: 15,
            batch_size: 32,
            lr: 5e-3,
            ..TrainConfig::default()
        };
        let log = train(&net, &mut weights, &config, &ds, None).unwrap();
        let final_acc = log.epochs.last().unwrap().train_accuracy;
        assert!(final_acc > 0.9, "final accuracy {final_acc}");
    }
}
