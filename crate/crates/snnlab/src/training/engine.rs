use crate::error::{Error, Result};
use crate::init::{WeightTensor, WeightValues};
use crate::numerics::{Matrix, Tensor4};
use crate::snn::{
    conv2d_backward_input, conv2d_backward_kernel, layer_drive, LayerSpec, NetworkSpec, ResetMode,
};
use crate::training::surrogate::{smoothed_step, surrogate_grad, SurrogateSpec};

/// Forward activation used when unrolling the network over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardMode {
    /// Exact Heaviside spikes (training and inference).
    Spiking,
    /// The smoothed step everywhere, making the whole forward pass
    /// differentiable; used to validate BPTT against finite differences.
    Smoothed,
}

/// Cached (membrane, activation) matrices for every layer and time step,
/// plus the accumulated output logits.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// [layer][t] membrane potentials, batch x width. Empty for readouts.
    pub u: Vec<Vec<Matrix>>,
    /// [layer][t] emitted activations, batch x width.
    pub x: Vec<Vec<Matrix>>,
    /// Sum of the last layer's activations over time, batch x classes.
    pub logits: Matrix,
    pub t_steps: usize,
}

fn activation(u: &Matrix, theta: f64, mode: ForwardMode, surrogate: &SurrogateSpec) -> Matrix {
    let mut x = u.clone();
    match mode {
        ForwardMode::Spiking => {
            for v in x.data_mut() {
                *v = if *v > theta { 1.0 } else { 0.0 };
            }
        }
        ForwardMode::Smoothed => {
            for v in x.data_mut() {
                *v = smoothed_step(*v, theta, surrogate);
            }
        }
    }
    x
}

/// Unroll the network for `t_steps`, caching the full trajectory for BPTT.
/// The raw input is re-injected at the first layer every step.
pub fn forward_unrolled(
    net: &NetworkSpec,
    weights: &[WeightTensor],
    input: &Matrix,
    t_steps: usize,
    mode: ForwardMode,
    surrogate: &SurrogateSpec,
) -> Result<Trajectory> {
    net.validate()?;
    if t_steps < 1 {
        return Err(Error::Parameter("t_steps must be >= 1".into()));
    }
    if net.lif.reset == ResetMode::Hard {
        return Err(Error::Parameter(
            "training supports soft or absent reset only".into(),
        ));
    }
    let batch = input.rows();
    let layers = net.layers.len();
    let theta = net.lif.theta;
    let beta = net.lif.beta;
    let soft = net.lif.reset == ResetMode::Soft;
    let mut u_traj: Vec<Vec<Matrix>> = vec![Vec::with_capacity(t_steps); layers];
    let mut x_traj: Vec<Vec<Matrix>> = vec![Vec::with_capacity(t_steps); layers];
    let mut logits = Matrix::zeros(batch, net.output_width());
    for t in 0..t_steps {
        let mut below = input.clone();
        let mut widx = 0;
        for (li, layer) in net.layers.iter().enumerate() {
            let drive = if layer.has_weights() {
                let d = layer_drive(layer, &weights[widx], &below)?;
                widx += 1;
                d
            } else {
                below.clone()
            };
            if layer.is_spiking() {
                let mut u = drive;
                if t > 0 {
                    let u_prev = &u_traj[li][t - 1];
                    let x_prev = &x_traj[li][t - 1];
                    for i in 0..u.data().len() {
                        let mut v = u.data()[i] + beta * u_prev.data()[i];
                        if soft {
                            v -= theta * x_prev.data()[i];
                        }
                        u.data_mut()[i] = v;
                    }
                }
                let x = activation(&u, theta, mode, surrogate);
                below = x.clone();
                u_traj[li].push(u);
                x_traj[li].push(x);
            } else {
                // linear readout: memoryless, outputs its drive
                below = drive.clone();
                u_traj[li].push(drive.clone());
                x_traj[li].push(drive);
            }
        }
        logits.add_assign(&x_traj[layers - 1][t])?;
    }
    Ok(Trajectory {
        u: u_traj,
        x: x_traj,
        logits,
        t_steps,
    })
}

fn drive_backward(
    layer: &LayerSpec,
    weights: &WeightTensor,
    below_x: &Matrix,
    g_drive: &Matrix,
    need_below: bool,
) -> Result<(Vec<f64>, Option<Matrix>)> {
    match (layer, &weights.values) {
        (LayerSpec::Dense { .. }, WeightValues::Dense(w))
        | (LayerSpec::LinearReadout { .. }, WeightValues::Dense(w)) => {
            let dw = g_drive.matmul_tn(below_x)?;
            let g_below = if need_below {
                Some(g_drive.matmul(w)?)
            } else {
                None
            };
            Ok((dw.data().to_vec(), g_below))
        }
        (
            LayerSpec::Conv2d {
                in_channels,
                padding,
                height,
                width,
                ..
            },
            WeightValues::Conv(kernels),
        ) => {
            let batch = below_x.rows();
            let input_dims = [batch, *in_channels, *height, *width];
            let input = Tensor4::from_vec(input_dims, below_x.data().to_vec())?;
            let [_, oc, oh, ow] = {
                let d = kernels.dims();
                [batch, d[0], height + 2 * padding + 1 - d[2], width + 2 * padding + 1 - d[3]]
            };
            let d_out = Tensor4::from_vec([batch, oc, oh, ow], g_drive.data().to_vec())?;
            let dk = conv2d_backward_kernel(&input, &d_out, kernels.dims(), *padding)?;
            let g_below = if need_below {
                let dx = conv2d_backward_input(&d_out, kernels, input_dims, *padding)?;
                Some(Matrix::from_vec(
                    batch,
                    in_channels * height * width,
                    dx.data().to_vec(),
                )?)
            } else {
                None
            };
            Ok((dk.data().to_vec(), g_below))
        }
        _ => Err(Error::Shape("layer/weight kind mismatch".into())),
    }
}

/// Reverse-mode gradients of the loss w.r.t. every weight tensor.
///
/// `dlogits` is the loss gradient w.r.t. the accumulated logits. The spike
/// nondifferentiability is replaced by the arctan surrogate; gradients flow
/// through the leak term and (unless `detach_reset`) through the soft-reset
/// term.
pub fn bptt_backward(
    net: &NetworkSpec,
    weights: &[WeightTensor],
    input: &Matrix,
    traj: &Trajectory,
    dlogits: &Matrix,
    surrogate: &SurrogateSpec,
    detach_reset: bool,
) -> Result<Vec<Vec<f64>>> {
    let t_steps = traj.t_steps;
    let layers = net.layers.len();
    let theta = net.lif.theta;
    let beta = net.lif.beta;
    let soft = net.lif.reset == ResetMode::Soft;
    let weighted = net.weighted_layers();
    if weights.len() != weighted.len() {
        return Err(Error::Shape("weight tensor count mismatch".into()));
    }
    // logits = sum_t x_last[t] => dL/dx_last[t] = dlogits for every t
    let mut g_x: Vec<Matrix> = vec![dlogits.clone(); t_steps];
    let mut grads_rev: Vec<Vec<f64>> = Vec::with_capacity(weights.len());
    let mut widx = weights.len();
    for li in (0..layers).rev() {
        let layer = &net.layers[li];
        // Gradient w.r.t. this layer's drive, per time step.
        let g_drive: Vec<Matrix> = if layer.is_spiking() {
            let mut g_u: Vec<Matrix> = Vec::with_capacity(t_steps);
            g_u.resize(t_steps, Matrix::zeros(0, 0));
            for t in (0..t_steps).rev() {
                let mut gx = g_x[t].clone();
                if t + 1 < t_steps && soft && !detach_reset {
                    let up = &g_u[t + 1];
                    for i in 0..gx.data().len() {
                        gx.data_mut()[i] -= theta * up.data()[i];
                    }
                }
                let u_t = &traj.u[li][t];
                let mut gu = gx;
                for i in 0..gu.data().len() {
                    gu.data_mut()[i] *= surrogate_grad(u_t.data()[i], theta, surrogate);
                }
                if t + 1 < t_steps {
                    let up = &g_u[t + 1];
                    for i in 0..gu.data().len() {
                        gu.data_mut()[i] += beta * up.data()[i];
                    }
                }
                g_u[t] = gu;
            }
            g_u
        } else {
            // linear readout: x = drive
            g_x.clone()
        };
        if layer.has_weights() {
            widx -= 1;
            let need_below = li > 0 && (li > 1 || net.layers[0].has_weights());
            let mut dw_total = vec![0.0; weights[widx].num_params()];
            let mut g_below: Vec<Matrix> = Vec::with_capacity(t_steps);
            for t in 0..t_steps {
                let below_x = if li == 0 {
                    input
                } else {
                    &traj.x[li - 1][t]
                };
                let (dw, gb) =
                    drive_backward(layer, &weights[widx], below_x, &g_drive[t], need_below)?;
                for (a, b) in dw_total.iter_mut().zip(dw.iter()) {
                    *a += b;
                }
                if let Some(gb) = gb {
                    g_below.push(gb);
                }
            }
            grads_rev.push(dw_total);
            if li == 0 || g_below.is_empty() {
                break;
            }
            g_x = g_below;
        } else {
            // weightless encoder at the bottom: nothing left to differentiate
            break;
        }
    }
    grads_rev.reverse();
    Ok(grads_rev)
}
