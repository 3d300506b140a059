//! Weight-initialization schemes.
//!
//! The central rule is the variance-conserving scheme for spiking
//! activations: Var[w] = 1 / (n * P(u > theta)) with zero-mean Gaussian
//! sampling, where n is the layer fan-in and P the standard normal upper
//! tail. Alongside it sits a registry of baselines from the ANN and SNN
//! literature. The SNN baselines (lee2016, bellec2018, zenke, ding2022,
//! fluctuation_driven) are documented approximations of their original
//! publications — each is flagged `approximation: true` in its descriptor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{std_normal_tail, Matrix, Rng, Tensor4};
use crate::snn::{LayerSpec, NetworkSpec};

/// Named initialization rule. Scheme-specific hyperparameters ride along.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum InitScheme {
    /// Variance-conserving scheme for the spiking threshold activation.
    Proposed,
    /// 2 / fan_in, the standard for ReLU networks.
    Kaiming,
    /// 2 / (fan_in + fan_out).
    Glorot,
    /// 1 / fan_in (LeCun-style fan-in scaling; approximation).
    Lee2016,
    /// 1 / fan_in (approximation).
    Bellec2018,
    /// 1 / fan_in (approximation).
    Zenke,
    /// Mean-driven parameterization targeting an asymptotic spiking
    /// response (approximation): mean 2*theta/fan_in, variance 1/fan_in.
    Ding2022,
    /// sigma_u^2 / (fan_in * p_hat) given a target membrane std and a
    /// measured presynaptic spike probability (approximation).
    FluctuationDriven {
        sigma_u: f64,
        /// Per-weighted-layer presynaptic spike probabilities measured by a
        /// calibration pass of the untrained network.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_hat: Option<Vec<f64>>,
    },
}

impl InitScheme {
    pub fn name(&self) -> &'static str {
        match self {
            InitScheme::Proposed => "proposed",
            InitScheme::Kaiming => "kaiming",
            InitScheme::Glorot => "glorot",
            InitScheme::Lee2016 => "lee2016",
            InitScheme::Bellec2018 => "bellec2018",
            InitScheme::Zenke => "zenke",
            InitScheme::Ding2022 => "ding2022",
            InitScheme::FluctuationDriven { .. } => "fluctuation_driven",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "proposed" => Ok(InitScheme::Proposed),
            "kaiming" => Ok(InitScheme::Kaiming),
            "glorot" => Ok(InitScheme::Glorot),
            "lee2016" => Ok(InitScheme::Lee2016),
            "bellec2018" => Ok(InitScheme::Bellec2018),
            "zenke" => Ok(InitScheme::Zenke),
            "ding2022" => Ok(InitScheme::Ding2022),
            "fluctuation_driven" => Ok(InitScheme::FluctuationDriven {
                sigma_u: 1.0,
                p_hat: None,
            }),
            other => Err(Error::Parameter(format!(
                "unknown init scheme '{other}' (expected one of proposed, kaiming, glorot, \
                 lee2016, bellec2018, zenke, ding2022, fluctuation_driven)"
            ))),
        }
    }

    pub fn is_approximation(&self) -> bool {
        matches!(
            self,
            InitScheme::Lee2016
                | InitScheme::Bellec2018
                | InitScheme::Zenke
                | InitScheme::Ding2022
                | InitScheme::FluctuationDriven { .. }
        )
    }
}

/// Gaussian sampling distribution for one layer's weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightDistribution {
    pub mean: f64,
    pub variance: f64,
    pub approximation: bool,
}

/// Var[w] = 1 / (fan_in * P(u > theta)) for the spiking threshold activation.
pub fn proposed_variance(fan_in: usize, theta: f64) -> Result<f64> {
    if fan_in < 1 {
        return Err(Error::Parameter("fan_in must be >= 1".into()));
    }
    let tail = std_normal_tail(theta)?;
    if tail < 1e-12 {
        return Err(Error::Overflow(format!(
            "spiking probability P(u > {theta}) underflows ({tail:.3e}); thresholds above ~8 \
             are not representable — lower theta or widen the layer"
        )));
    }
    Ok(1.0 / (fan_in as f64 * tail))
}

/// 2 / fan_in, the standard initialization for a ReLU network.
pub fn kaiming_variance(fan_in: usize) -> Result<f64> {
    if fan_in < 1 {
        return Err(Error::Parameter("fan_in must be >= 1".into()));
    }
    Ok(2.0 / fan_in as f64)
}

/// 2 / (fan_in + fan_out).
pub fn glorot_variance(fan_in: usize, fan_out: usize) -> Result<f64> {
    if fan_in < 1 || fan_out < 1 {
        return Err(Error::Parameter("fan_in and fan_out must be >= 1".into()));
    }
    Ok(2.0 / (fan_in + fan_out) as f64)
}

/// sigma_u^2 / (fan_in * p_hat).
pub fn fluctuation_variance(fan_in: usize, sigma_u: f64, p_hat: f64) -> Result<f64> {
    if fan_in < 1 {
        return Err(Error::Parameter("fan_in must be >= 1".into()));
    }
    if !(p_hat > 0.0) || !p_hat.is_finite() {
        return Err(Error::Parameter(format!(
            "measured spike probability must be positive, got {p_hat}"
        )));
    }
    Ok(sigma_u * sigma_u / (fan_in as f64 * p_hat))
}

/// Sampling distribution for `scheme` at one layer.
///
/// `layer_index` counts weighted layers in forward order; it selects the
/// calibrated spike probability for the fluctuation-driven scheme.
pub fn baseline_variance(
    scheme: &InitScheme,
    fan_in: usize,
    fan_out: usize,
    theta: f64,
    layer_index: usize,
) -> Result<WeightDistribution> {
    if fan_in < 1 || fan_out < 1 {
        return Err(Error::Parameter("fan_in and fan_out must be >= 1".into()));
    }
    let dist = match scheme {
        InitScheme::Proposed => WeightDistribution {
            mean: 0.0,
            variance: proposed_variance(fan_in, theta)?,
            approximation: false,
        },
        InitScheme::Kaiming => WeightDistribution {
            mean: 0.0,
            variance: kaiming_variance(fan_in)?,
            approximation: false,
        },
        InitScheme::Glorot => WeightDistribution {
            mean: 0.0,
            variance: glorot_variance(fan_in, fan_out)?,
            approximation: false,
        },
        InitScheme::Lee2016 | InitScheme::Bellec2018 | InitScheme::Zenke => WeightDistribution {
            mean: 0.0,
            variance: 1.0 / fan_in as f64,
            approximation: true,
        },
        InitScheme::Ding2022 => WeightDistribution {
            mean: 2.0 * theta / fan_in as f64,
            variance: 1.0 / fan_in as f64,
            approximation: true,
        },
        InitScheme::FluctuationDriven { sigma_u, p_hat } => {
            let p = p_hat
                .as_ref()
                .and_then(|v| v.get(layer_index).copied())
                .ok_or_else(|| {
                    Error::MissingCalibration(format!(
                        "fluctuation_driven has no measured spike probability for weighted \
                         layer {layer_index}; run a calibration pass first"
                    ))
                })?;
            WeightDistribution {
                mean: 0.0,
                variance: fluctuation_variance(fan_in, *sigma_u, p)?,
                approximation: true,
            }
        }
    };
    debug_assert!(dist.variance.is_finite() && dist.variance > 0.0);
    Ok(dist)
}

/// Where a weight tensor came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub scheme: String,
    pub seed: u64,
    pub fan_in: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightValues {
    Dense(Matrix),
    Conv(Tensor4),
}

/// Sampled weights for one layer plus their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTensor {
    pub values: WeightValues,
    pub provenance: Provenance,
}

impl WeightTensor {
    pub fn dense_zeros(out_width: usize, fan_in: usize) -> Self {
        WeightTensor {
            values: WeightValues::Dense(Matrix::zeros(out_width, fan_in)),
            provenance: Provenance {
                scheme: "zeros".into(),
                seed: 0,
                fan_in,
            },
        }
    }

    pub fn num_params(&self) -> usize {
        match &self.values {
            WeightValues::Dense(m) => m.data().len(),
            WeightValues::Conv(t) => t.data().len(),
        }
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        match &mut self.values {
            WeightValues::Dense(m) => m.data_mut(),
            WeightValues::Conv(t) => t.data_mut(),
        }
    }

    pub fn values_flat(&self) -> &[f64] {
        match &self.values {
            WeightValues::Dense(m) => m.data(),
            WeightValues::Conv(t) => t.data(),
        }
    }
}

/// Sample the weights of a single layer. `layer_index` is the position of the
/// layer among weighted layers; the RNG substream is derived from it so every
/// layer is reproducible independently of generation order.
pub fn initialize_layer(
    layer: &LayerSpec,
    scheme: &InitScheme,
    theta: f64,
    root: &Rng,
    layer_index: usize,
) -> Result<WeightTensor> {
    let fan_in = layer.fan_in();
    let mut rng = root.substream(layer_index as u64);
    // fan_out follows the same convention as fan_in: receptive-field size,
    // i.e. kernel^2 * out_channels for conv layers.
    let (values, fan_out) = match *layer {
        LayerSpec::LifEncoder { .. } => {
            return Err(Error::Parameter("encoder has no weights".into()))
        }
        LayerSpec::Dense { width, fan_in } | LayerSpec::LinearReadout { width, fan_in } => {
            (WeightValues::Dense(Matrix::zeros(width, fan_in)), width)
        }
        LayerSpec::Conv2d {
            in_channels,
            out_channels,
            kernel,
            ..
        } => (
            WeightValues::Conv(Tensor4::zeros([out_channels, in_channels, kernel, kernel])),
            out_channels * kernel * kernel,
        ),
    };
    let dist = baseline_variance(scheme, fan_in, fan_out, theta, layer_index)?;
    let std = dist.variance.sqrt();
    let mut wt = WeightTensor {
        values,
        provenance: Provenance {
            scheme: scheme.name().into(),
            seed: root.seed(),
            fan_in,
        },
    };
    rng.fill_gaussian(dist.mean, std, wt.values_mut());
    Ok(wt)
}

/// Sample weights for every weighted layer of `net` from `scheme`.
/// Biases are absent throughout; the neuron model has none.
pub fn initialize_network(net: &NetworkSpec, scheme: &InitScheme, seed: u64) -> Result<Vec<WeightTensor>> {
    net.validate()?;
    let root = Rng::from_seed(seed);
    net.weighted_layers()
        .iter()
        .enumerate()
        .map(|(wi, &li)| initialize_layer(&net.layers[li], scheme, net.lif.theta, &root, wi))
        .collect()
}

/// Measure per-weighted-layer presynaptic spike probabilities by running one
/// forward pass of the untrained network on calibration inputs, initializing
/// layer by layer with the probabilities measured so far. Returns a scheme
/// with the calibration attached.
pub fn calibrate_fluctuation_driven(
    net: &NetworkSpec,
    sigma_u: f64,
    calibration_input: &Matrix,
    seed: u64,
) -> Result<InitScheme> {
    use crate::snn::{heaviside_spike, LayerState};
    net.validate()?;
    if calibration_input.cols() != net.input.len() {
        return Err(Error::Shape(format!(
            "calibration input width {} vs network input {}",
            calibration_input.cols(),
            net.input.len()
        )));
    }
    let root = Rng::from_seed(seed);
    let theta = net.lif.theta;
    let mut p_hats: Vec<f64> = Vec::new();
    // Spikes of the layer feeding the current one, flattened over the batch.
    let batch = calibration_input.rows();
    let encoder_spikes = heaviside_spike(calibration_input.data(), theta);
    let mut prev_spike_prob =
        encoder_spikes.iter().sum::<f64>() / encoder_spikes.len() as f64;
    let mut x = Matrix::from_vec(batch, net.input.len(), encoder_spikes)?;
    let weighted = net.weighted_layers();
    for (wi, &li) in weighted.iter().enumerate() {
        let layer = &net.layers[li];
        if li == 0 {
            // conv nets feed the raw input to the first weighted layer
            x = calibration_input.clone();
            prev_spike_prob = 1.0; // unused; real-valued input
        }
        p_hats.push(prev_spike_prob.max(1e-6));
        let scheme = InitScheme::FluctuationDriven {
            sigma_u,
            p_hat: Some(p_hats.clone()),
        };
        let wt = initialize_layer(layer, &scheme, theta, &root, wi)?;
        let drive = crate::snn::layer_drive(layer, &wt, &x)?;
        let mut state = LayerState::zeros(drive.data().len());
        let spikes = crate::snn::lif_step(
            &mut state,
            drive.data(),
            &crate::snn::LifParams {
                reset: crate::snn::ResetMode::None,
                ..net.lif
            },
        )?;
        prev_spike_prob = spikes.iter().sum::<f64>() / spikes.len().max(1) as f64;
        x = Matrix::from_vec(batch, layer.out_width(), spikes)?;
    }
    Ok(InitScheme::FluctuationDriven {
        sigma_u,
        p_hat: Some(p_hats),
    })
}
