use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::init::{WeightTensor, WeightValues};
use crate::numerics::{Matrix, Tensor4};
use crate::snn::conv::conv2d_forward;
use crate::snn::lif::{LayerState, LifParams};

/// Shape of the raw network input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputShape {
    Flat(usize),
    Image {
        channels: usize,
        height: usize,
        width: usize,
    },
}

impl InputShape {
    pub fn len(&self) -> usize {
        match *self {
            InputShape::Flat(n) => n,
            InputShape::Image {
                channels,
                height,
                width,
            } => channels * height * width,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One layer of the architecture. Conv layers carry their input spatial
/// dimensions so output shapes are derivable without a separate pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerSpec {
    /// Weightless LIF layer that receives the raw input as membrane drive.
    LifEncoder { width: usize },
    /// Fully connected synapses into a LIF layer.
    Dense { width: usize, fan_in: usize },
    /// Convolutional synapses into a LIF layer; fan-in is kernel^2 * in_channels.
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        padding: usize,
        height: usize,
        width: usize,
    },
    /// Fully connected linear layer with no spiking dynamics; outputs its
    /// drive unchanged (used as a readout head).
    LinearReadout { width: usize, fan_in: usize },
}

impl LayerSpec {
    /// Flattened output width of this layer.
    pub fn out_width(&self) -> usize {
        match *self {
            LayerSpec::LifEncoder { width } => width,
            LayerSpec::Dense { width, .. } => width,
            LayerSpec::Conv2d {
                out_channels,
                kernel,
                padding,
                height,
                width,
                ..
            } => {
                let oh = height + 2 * padding + 1 - kernel;
                let ow = width + 2 * padding + 1 - kernel;
                out_channels * oh * ow
            }
            LayerSpec::LinearReadout { width, .. } => width,
        }
    }

    /// Fan-in used by initialization schemes; conv layers use kernel^2 * c.
    pub fn fan_in(&self) -> usize {
        match *self {
            LayerSpec::LifEncoder { .. } => 0,
            LayerSpec::Dense { fan_in, .. } => fan_in,
            LayerSpec::Conv2d {
                in_channels, kernel, ..
            } => kernel * kernel * in_channels,
            LayerSpec::LinearReadout { fan_in, .. } => fan_in,
        }
    }

    pub fn has_weights(&self) -> bool {
        !matches!(self, LayerSpec::LifEncoder { .. })
    }

    pub fn is_spiking(&self) -> bool {
        !matches!(self, LayerSpec::LinearReadout { .. })
    }
}

/// Layered architecture description with shared LIF hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input: InputShape,
    pub layers: Vec<LayerSpec>,
    pub lif: LifParams,
}

impl NetworkSpec {
    /// Deep fully-connected stack used by the propagation experiments:
    /// a LIF encoder of width `width` followed by `depth` dense LIF layers
    /// of the same width.
    pub fn deep_dense(width: usize, depth: usize, lif: LifParams) -> Self {
        let mut layers = vec![LayerSpec::LifEncoder { width }];
        for _ in 0..depth {
            layers.push(LayerSpec::Dense {
                width,
                fan_in: width,
            });
        }
        NetworkSpec {
            input: InputShape::Flat(width),
            layers,
            lif,
        }
    }

    /// MLP classifier: encoder over the input pixels, `hidden_layers` dense
    /// LIF layers of width `hidden_width`, and a dense LIF output layer whose
    /// spikes are counted as class evidence.
    pub fn mlp(
        input_dim: usize,
        hidden_width: usize,
        hidden_layers: usize,
        classes: usize,
        lif: LifParams,
    ) -> Self {
        let mut layers = vec![LayerSpec::LifEncoder { width: input_dim }];
        let mut fan_in = input_dim;
        for _ in 0..hidden_layers {
            layers.push(LayerSpec::Dense {
                width: hidden_width,
                fan_in,
            });
            fan_in = hidden_width;
        }
        layers.push(LayerSpec::Dense {
            width: classes,
            fan_in,
        });
        NetworkSpec {
            input: InputShape::Flat(input_dim),
            layers,
            lif,
        }
    }

    /// Convolutional classifier: the input image feeds the first conv layer
    /// directly; conv LIF layers preserve spatial dimensions; a linear
    /// readout feeds a final dense LIF layer that emits the output spikes.
    pub fn cnn(
        channels: usize,
        height: usize,
        width: usize,
        conv_channels: usize,
        conv_layers: usize,
        kernel: usize,
        classes: usize,
        lif: LifParams,
    ) -> Self {
        let padding = (kernel - 1) / 2;
        let mut layers = Vec::new();
        let mut in_c = channels;
        for _ in 0..conv_layers {
            layers.push(LayerSpec::Conv2d {
                in_channels: in_c,
                out_channels: conv_channels,
                kernel,
                padding,
                height,
                width,
            });
            in_c = conv_channels;
        }
        let flat = conv_channels * height * width;
        layers.push(LayerSpec::Dense {
            width: classes,
            fan_in: flat,
        });
        NetworkSpec {
            input: InputShape::Image {
                channels,
                height,
                width,
            },
            layers,
            lif,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.lif.validate()?;
        if self.layers.is_empty() {
            return Err(Error::Parameter("network has no layers".into()));
        }
        let mut prev = self.input.len();
        for (i, layer) in self.layers.iter().enumerate() {
            match *layer {
                LayerSpec::LifEncoder { width } => {
                    if i != 0 {
                        return Err(Error::Parameter(format!(
                            "layer {i}: LIF encoder only allowed as the first layer"
                        )));
                    }
                    if width != prev {
                        return Err(Error::Shape(format!(
                            "layer {i}: encoder width {width} vs input width {prev}"
                        )));
                    }
                }
                LayerSpec::Dense { fan_in, .. } | LayerSpec::LinearReadout { fan_in, .. } => {
                    if fan_in != prev {
                        return Err(Error::Shape(format!(
                            "layer {i}: fan_in {fan_in} vs previous width {prev}"
                        )));
                    }
                }
                LayerSpec::Conv2d {
                    in_channels,
                    height,
                    width,
                    ..
                } => {
                    if in_channels * height * width != prev {
                        return Err(Error::Shape(format!(
                            "layer {i}: conv input {in_channels}x{height}x{width} vs previous width {prev}"
                        )));
                    }
                }
            }
            prev = layer.out_width();
        }
        Ok(())
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().map(|l| l.out_width()).unwrap_or(0)
    }

    /// Indices of layers that own a weight tensor, in forward order.
    pub fn weighted_layers(&self) -> Vec<usize> {
        self.layers
            .iter()
            .enumerate()
            .filter(|(_, l)| l.has_weights())
            .map(|(i, _)| i)
            .collect()
    }
}

fn dense_drive(weights: &WeightTensor, x: &Matrix) -> Result<Matrix> {
    match &weights.values {
        WeightValues::Dense(w) => x.matmul_nt(w),
        WeightValues::Conv(_) => Err(Error::Shape("dense layer given conv weights".into())),
    }
}

fn conv_drive(
    weights: &WeightTensor,
    x: &Matrix,
    in_channels: usize,
    height: usize,
    width: usize,
    padding: usize,
) -> Result<Matrix> {
    let kernels = match &weights.values {
        WeightValues::Conv(k) => k,
        WeightValues::Dense(_) => {
            return Err(Error::Shape("conv layer given dense weights".into()))
        }
    };
    let batch = x.rows();
    let input = Tensor4::from_vec([batch, in_channels, height, width], x.data().to_vec())?;
    let out = conv2d_forward(&input, kernels, padding)?;
    let [b, oc, oh, ow] = out.dims();
    Matrix::from_vec(b, oc * oh * ow, out.data().to_vec())
}

/// Compute the feedforward drive of `layer` given the previous layer's
/// spikes (or the raw input for the first weighted layer of a conv net).
pub(crate) fn layer_drive(layer: &LayerSpec, weights: &WeightTensor, x: &Matrix) -> Result<Matrix> {
    match *layer {
        LayerSpec::LifEncoder { .. } => Err(Error::Parameter("encoder has no weights".into())),
        LayerSpec::Dense { .. } | LayerSpec::LinearReadout { .. } => dense_drive(weights, x),
        LayerSpec::Conv2d {
            in_channels,
            padding,
            height,
            width,
            ..
        } => conv_drive(weights, x, in_channels, height, width, padding),
    }
}

/// Synchronous depth-by-time forward sweep.
///
/// At every time step the raw input is injected into the first layer
/// (membrane drive for an encoder, conv input otherwise) and spikes
/// propagate forward within the same step. The recorder sees
/// (layer, t, membrane potentials, spikes) flattened over the batch,
/// with t starting at 1.
pub fn forward_pass<F>(
    net: &NetworkSpec,
    weights: &[WeightTensor],
    input: &Matrix,
    t_steps: usize,
    mut record: F,
) -> Result<()>
where
    F: FnMut(usize, usize, &[f64], &[f64]),
{
    net.validate()?;
    if t_steps < 1 {
        return Err(Error::Parameter("t_steps must be >= 1".into()));
    }
    if input.cols() != net.input.len() {
        return Err(Error::Shape(format!(
            "input width {} vs network input {}",
            input.cols(),
            net.input.len()
        )));
    }
    if weights.len() != net.weighted_layers().len() {
        return Err(Error::Shape(format!(
            "expected {} weight tensors, got {}",
            net.weighted_layers().len(),
            weights.len()
        )));
    }
    let batch = input.rows();
    let mut states: Vec<LayerState> = net
        .layers
        .iter()
        .map(|l| LayerState::zeros(batch * l.out_width()))
        .collect();
    for t in 1..=t_steps {
        let mut x = input.clone();
        let mut widx = 0;
        for (li, layer) in net.layers.iter().enumerate() {
            let drive = if layer.has_weights() {
                let d = layer_drive(layer, &weights[widx], &x)?;
                widx += 1;
                d
            } else {
                x.clone()
            };
            if layer.is_spiking() {
                let spikes = super::lif::lif_step(&mut states[li], drive.data(), &net.lif)?;
                record(li, t, &states[li].u, &spikes);
                x = Matrix::from_vec(batch, layer.out_width(), spikes)?;
            } else {
                record(li, t, drive.data(), drive.data());
                x = drive;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::{initialize_network, InitScheme};
    use crate::numerics::Rng;
    use crate::snn::{heaviside_spike, ResetMode};

    #[test]
    fn one_layer_single_step_is_heaviside() {
        let lif = LifParams::new(0.5, 1.0, ResetMode::None).unwrap();
        let net = NetworkSpec {
            input: InputShape::Flat(4),
            layers: vec![LayerSpec::LifEncoder { width: 4 }],
            lif,
        };
        let input = Matrix::from_vec(1, 4, vec![1.5, 0.2, -0.3, 1.01]).unwrap();
        let mut spikes_out = Vec::new();
        forward_pass(&net, &[], &input, 1, |_, _, _, s| spikes_out = s.to_vec()).unwrap();
        assert_eq!(spikes_out, heaviside_spike(input.data(), 1.0));
    }

    #[test]
    fn zero_weights_dead_network() {
        let lif = LifParams::default();
        let net = NetworkSpec::deep_dense(6, 3, lif);
        let weights: Vec<WeightTensor> = net
            .weighted_layers()
            .iter()
            .map(|_| WeightTensor::dense_zeros(6, 6))
            .collect();
        let mut rng = Rng::from_seed(3);
        let input = Matrix::from_vec(1, 6, rng.sample_gaussian(0.0, 2.0, 6).unwrap()).unwrap();
        forward_pass(&net, &weights, &input, 3, |layer, _, _, s| {
            if layer >= 1 {
                assert!(s.iter().all(|&v| v == 0.0));
            }
        })
        .unwrap();
    }

    #[test]
    fn two_layer_trajectory_matches_hand_unroll() {
        let lif = LifParams::new(0.5, 1.0, ResetMode::Soft).unwrap();
        let net = NetworkSpec::deep_dense(4, 2, lif);
        let seed = 17;
        let weights = initialize_network(&net, &InitScheme::Proposed, seed).unwrap();
        let mut rng = Rng::from_seed(99);
        let input_vec = rng.sample_gaussian(0.0, 1.0, 4).unwrap();
        let input = Matrix::from_vec(1, 4, input_vec.clone()).unwrap();

        // Hand unroll of the soft-reset dynamics, layer by layer per step.
        let w: Vec<&Matrix> = weights
            .iter()
            .map(|wt| match &wt.values {
                WeightValues::Dense(m) => m,
                _ => unreachable!(),
            })
            .collect();
        let mut u = vec![vec![0.0; 4]; 3];
        let mut xp = vec![vec![0.0; 4]; 3];
        let mut expected = Vec::new();
        for _t in 1..=2 {
            let mut below: Vec<f64>;
            // encoder
            for i in 0..4 {
                u[0][i] = input_vec[i] + 0.5 * u[0][i] - xp[0][i];
            }
            below = u[0].iter().map(|&v| if v > 1.0 { 1.0 } else { 0.0 }).collect();
            xp[0] = below.clone();
            expected.push((0, u[0].clone(), below.clone()));
            for l in 1..=2 {
                let drive = w[l - 1].matvec(&below).unwrap();
                for i in 0..4 {
                    u[l][i] = drive[i] + 0.5 * u[l][i] - xp[l][i];
                }
                below = u[l].iter().map(|&v| if v > 1.0 { 1.0 } else { 0.0 }).collect();
                xp[l] = below.clone();
                expected.push((l, u[l].clone(), below.clone()));
            }
        }

        let mut got = Vec::new();
        forward_pass(&net, &weights, &input, 2, |layer, _, u, s| {
            got.push((layer, u.to_vec(), s.to_vec()));
        })
        .unwrap();
        assert_eq!(got.len(), expected.len());
        for ((gl, gu, gs), (el, eu, es)) in got.iter().zip(expected.iter()) {
            assert_eq!(gl, el);
            for (a, b) in gu.iter().zip(eu.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
            assert_eq!(gs, es);
        }
    }

    #[test]
    fn relu_support_equivalence_at_theta_zero() {
        // theta=0, beta=0, reset none, T=1: spikes mask equals ReLU support.
        let lif = LifParams::new(0.0, 0.0, ResetMode::None).unwrap();
        let net = NetworkSpec {
            input: InputShape::Flat(8),
            layers: vec![LayerSpec::LifEncoder { width: 8 }],
            lif,
        };
        let mut rng = Rng::from_seed(8);
        let u0 = rng.sample_gaussian(0.0, 1.0, 8).unwrap();
        let input = Matrix::from_vec(1, 8, u0.clone()).unwrap();
        forward_pass(&net, &[], &input, 1, |_, _, u, s| {
            for i in 0..8 {
                assert!((s[i] * u[i] - u0[i].max(0.0)).abs() < 1e-15);
            }
        })
        .unwrap();
    }

    #[test]
    fn invalid_shapes_rejected() {
        let net = NetworkSpec::deep_dense(4, 1, LifParams::default());
        let input = Matrix::zeros(1, 5);
        assert!(forward_pass(&net, &[], &input, 1, |_, _, _, _| {}).is_err());
    }
}
