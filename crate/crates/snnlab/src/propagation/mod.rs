//! Depth-by-time simulation harness: runs initialized deep networks on
//! Gaussian inputs and records per-(layer, time, seed) membrane statistics.
//!
//! Weights are sampled lazily one layer at a time from per-(seed, layer)
//! RNG substreams, so a 100-layer, 1000-wide network never holds more than
//! one weight matrix in memory.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init::{baseline_variance, calibrate_fluctuation_driven, InitScheme};
use crate::numerics::{describe, Matrix, Rng};
use crate::snn::{lif_step, LayerState, LifParams, NetworkSpec, ResetMode};

/// Configuration of one propagation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    /// Number of weighted layers (the encoder is layer 0 on top of these).
    pub depth: usize,
    /// Neurons per layer.
    pub width: usize,
    /// Time steps; 1 selects the reset-free single-step analysis.
    pub t_steps: usize,
    pub lif: LifParams,
    pub scheme: InitScheme,
    /// Number of repetitions.
    pub seeds: u64,
    /// Base seed; repetition k uses substreams of base_seed + k influence.
    pub base_seed: u64,
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        self.lif.validate()?;
        if self.depth < 1 || self.width < 1 || self.t_steps < 1 || self.seeds < 1 {
            return Err(Error::Parameter(
                "depth, width, t_steps and seeds must all be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One (seed, layer, t) statistics record. Skewness and excess kurtosis are
/// NaN when the membrane variance is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub seed: u64,
    pub layer: usize,
    pub t: usize,
    pub var_u: f64,
    pub spike_count: u64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Full record grid of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub depth: usize,
    pub width: usize,
    pub t_steps: usize,
    pub seeds: u64,
    pub records: Vec<TraceRecord>,
}

impl SimTrace {
    pub fn record(&self, seed: u64, layer: usize, t: usize) -> Option<&TraceRecord> {
        // records are emitted in (seed, t, layer)-major order but layer-major
        // within a seed for multi-step runs; search instead of indexing.
        self.records
            .iter()
            .find(|r| r.seed == seed && r.layer == layer && r.t == t)
    }

    /// Mean over seeds of the per-seed time-average of Var[u] at `layer`.
    pub fn time_mean_var(&self, layer: usize) -> f64 {
        self.time_mean_by(layer, |r| r.var_u)
    }

    pub fn time_mean_skewness(&self, layer: usize) -> f64 {
        self.time_mean_by(layer, |r| r.skewness)
    }

    pub fn time_mean_excess_kurtosis(&self, layer: usize) -> f64 {
        self.time_mean_by(layer, |r| r.excess_kurtosis)
    }

    fn time_mean_by(&self, layer: usize, f: impl Fn(&TraceRecord) -> f64) -> f64 {
        let vals: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.layer == layer)
            .map(&f)
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    /// Mean over seeds of Var[u] at (layer, t).
    pub fn mean_var(&self, layer: usize, t: usize) -> f64 {
        let vals: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.layer == layer && r.t == t)
            .map(|r| r.var_u)
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    /// Total spike count at (layer, t) summed over nothing, max over seeds.
    pub fn max_spike_count(&self, layer: usize, t: usize) -> u64 {
        self.records
            .iter()
            .filter(|r| r.layer == layer && r.t == t)
            .map(|r| r.spike_count)
            .max()
            .unwrap_or(0)
    }

    pub fn min_spike_count(&self, layer: usize, t: usize) -> u64 {
        self.records
            .iter()
            .filter(|r| r.layer == layer && r.t == t)
            .map(|r| r.spike_count)
            .min()
            .unwrap_or(0)
    }
}

/// Per-(layer, t) mean and standard deviation over the seed axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCell {
    pub layer: usize,
    pub t: usize,
    pub mean_var: f64,
    pub std_var: f64,
    pub mean_spike_count: f64,
    pub std_spike_count: f64,
    pub mean_skewness: f64,
    pub mean_excess_kurtosis: f64,
}

/// Mean and std across seeds, preserving the (layer, t) grid.
pub fn aggregate(trace: &SimTrace) -> Result<Vec<AggregateCell>> {
    if trace.records.is_empty() {
        return Err(Error::Parameter("aggregate: empty trace".into()));
    }
    let mut cells = Vec::new();
    for layer in 0..=trace.depth {
        for t in 1..=trace.t_steps {
            let recs: Vec<&TraceRecord> = trace
                .records
                .iter()
                .filter(|r| r.layer == layer && r.t == t)
                .collect();
            if recs.is_empty() {
                continue;
            }
            let n = recs.len() as f64;
            let mean_std = |f: &dyn Fn(&TraceRecord) -> f64| {
                let mean = recs.iter().map(|r| f(r)).sum::<f64>() / n;
                let var = recs.iter().map(|r| (f(r) - mean).powi(2)).sum::<f64>() / n;
                (mean, var.sqrt())
            };
            let (mean_var, std_var) = mean_std(&|r: &TraceRecord| r.var_u);
            let (mean_sc, std_sc) = mean_std(&|r: &TraceRecord| r.spike_count as f64);
            let (mean_sk, _) = mean_std(&|r: &TraceRecord| r.skewness);
            let (mean_ku, _) = mean_std(&|r: &TraceRecord| r.excess_kurtosis);
            cells.push(AggregateCell {
                layer,
                t,
                mean_var,
                std_var,
                mean_spike_count: mean_sc,
                std_spike_count: std_sc,
                mean_skewness: mean_sk,
                mean_excess_kurtosis: mean_ku,
            });
        }
    }
    Ok(cells)
}

/// Resolve the scheme for this run: fluctuation_driven without measured
/// probabilities gets a calibration pass of the untrained network on a
/// Gaussian calibration input.
fn resolve_scheme(config: &PropagationConfig) -> Result<InitScheme> {
    match &config.scheme {
        InitScheme::FluctuationDriven { sigma_u, p_hat: None } => {
            let net = NetworkSpec::deep_dense(config.width, config.depth, config.lif);
            let mut rng = Rng::from_seed(config.base_seed).substream(CALIBRATION_TAG);
            let input = Matrix::from_vec(
                1,
                config.width,
                rng.sample_gaussian(0.0, 1.0, config.width)?,
            )?;
            calibrate_fluctuation_driven(&net, *sigma_u, &input, config.base_seed)
        }
        other => Ok(other.clone()),
    }
}

const INPUT_TAG: u64 = 0xFFFF_FFFF_0000_0001;
const CALIBRATION_TAG: u64 = 0xFFFF_FFFF_0000_0002;

/// Sample one layer's weight matrix in [fan_in x width] orientation so the
/// spike-driven accumulation below walks contiguous rows.
fn sample_layer_weights(
    scheme: &InitScheme,
    width: usize,
    theta: f64,
    root: &Rng,
    layer_index: usize,
) -> Result<(Vec<f64>, f64)> {
    let dist = baseline_variance(scheme, width, width, theta, layer_index)?;
    let mut rng = root.substream(layer_index as u64);
    let mut w = vec![0.0; width * width];
    rng.fill_gaussian(dist.mean, dist.variance.sqrt(), &mut w);
    Ok((w, dist.mean))
}

/// drive[j] = sum_i x[i] * W[i][j] for binary x; only active rows are read.
fn drive_from_spikes(w: &[f64], width: usize, spikes: &[f64]) -> Vec<f64> {
    let mut drive = vec![0.0; width];
    for (i, &x) in spikes.iter().enumerate() {
        if x != 0.0 {
            let row = &w[i * width..(i + 1) * width];
            for (d, v) in drive.iter_mut().zip(row.iter()) {
                *d += v;
            }
        }
    }
    drive
}

fn record_layer(
    records: &mut Vec<TraceRecord>,
    seed: u64,
    layer: usize,
    t: usize,
    u: &[f64],
    spikes: &[f64],
) {
    let stats = describe(u).expect("layer width >= 2");
    records.push(TraceRecord {
        seed,
        layer,
        t,
        var_u: stats.variance,
        spike_count: spikes.iter().sum::<f64>() as u64,
        skewness: stats.skewness.unwrap_or(f64::NAN),
        excess_kurtosis: stats.excess_kurtosis.unwrap_or(f64::NAN),
    });
}

/// Shared driver: layer-major sweep. For each layer the full spike train of
/// the layer below is already known, so each weight matrix is sampled once,
/// used for all time steps, and dropped.
fn run(config: &PropagationConfig) -> Result<SimTrace> {
    config.validate()?;
    let scheme = resolve_scheme(config)?;
    let width = config.width;
    let t_steps = config.t_steps;
    let lif = config.lif;
    let mut records = Vec::with_capacity((config.seeds as usize) * (config.depth + 1) * t_steps);
    for k in 0..config.seeds {
        let seed = config.base_seed + k;
        let root = Rng::from_seed(seed);
        let mut input_rng = root.substream(INPUT_TAG);
        let input = input_rng.sample_gaussian(0.0, 1.0, width)?;
        // layer 0: encoder receiving the input as drive at every step
        let mut spike_train: Vec<Vec<f64>> = Vec::with_capacity(t_steps);
        {
            let mut state = LayerState::zeros(width);
            for t in 1..=t_steps {
                let spikes = lif_step(&mut state, &input, &lif)?;
                record_layer(&mut records, seed, 0, t, &state.u, &spikes);
                spike_train.push(spikes);
            }
        }
        for l in 1..=config.depth {
            let (w, _) = sample_layer_weights(&scheme, width, lif.theta, &root, l - 1)?;
            let mut state = LayerState::zeros(width);
            let mut next_train: Vec<Vec<f64>> = Vec::with_capacity(t_steps);
            for (ti, below) in spike_train.iter().enumerate() {
                let drive = drive_from_spikes(&w, width, below);
                let spikes = lif_step(&mut state, &drive, &lif)?;
                record_layer(&mut records, seed, l, ti + 1, &state.u, &spikes);
                next_train.push(spikes);
            }
            spike_train = next_train;
        }
    }
    Ok(SimTrace {
        depth: config.depth,
        width,
        t_steps,
        seeds: config.seeds,
        records,
    })
}

/// Single synchronous depth sweep at t = 0: fresh weights and input per
/// seed, no reset, no history.
pub fn run_single_step(config: &PropagationConfig) -> Result<SimTrace> {
    if config.t_steps != 1 {
        return Err(Error::Parameter(format!(
            "run_single_step requires t_steps = 1, got {}",
            config.t_steps
        )));
    }
    if config.lif.reset != ResetMode::None {
        return Err(Error::Parameter(
            "run_single_step requires reset = none (no spiking history at t = 0)".into(),
        ));
    }
    run(config)
}

/// Depth x time sweep with soft reset and the input re-injected every step.
pub fn run_multi_step(config: &PropagationConfig) -> Result<SimTrace> {
    if config.t_steps < 2 {
        return Err(Error::Parameter(format!(
            "run_multi_step requires t_steps >= 2, got {}",
            config.t_steps
        )));
    }
    run(config)
}

/// Grid of single-step runs over (width, theta).
pub fn run_finite_size_sweep(
    widths: &[usize],
    thetas: &[f64],
    base: &PropagationConfig,
) -> Result<Vec<(usize, f64, SimTrace)>> {
    if widths.is_empty() || thetas.is_empty() {
        return Err(Error::Parameter("sweep requires non-empty grids".into()));
    }
    let mut out = Vec::new();
    for &w in widths {
        for &theta in thetas {
            let mut config = base.clone();
            config.width = w;
            config.lif.theta = theta;
            config.t_steps = 1;
            config.lif.reset = ResetMode::None;
            out.push((w, theta, run_single_step(&config)?));
        }
    }
    Ok(out)
}
