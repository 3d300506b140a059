use crate::error::Result;
use crate::init::{initialize_network, InitScheme, WeightTensor};
use crate::numerics::{Matrix, Rng};
use crate::snn::{LifParams, NetworkSpec, ResetMode};
use crate::training::engine::{bptt_backward, forward_unrolled, ForwardMode};
use crate::training::loss::spike_count_cross_entropy;
use crate::training::surrogate::SurrogateSpec;

/// Outcome of the finite-difference gradient check.
#[derive(Debug, Clone)]
pub struct GradcheckReport {
    /// Worst relative error over all networks and weights.
    pub max_relative_error: f64,
    pub networks_checked: usize,
    pub params_checked: usize,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.max_relative_error < 1e-4
    }
}

fn loss_of(
    net: &NetworkSpec,
    weights: &[WeightTensor],
    input: &Matrix,
    labels: &[usize],
    t_steps: usize,
    surrogate: &SurrogateSpec,
) -> Result<f64> {
    let traj = forward_unrolled(net, weights, input, t_steps, ForwardMode::Smoothed, surrogate)?;
    let (loss, _, _) = spike_count_cross_entropy(&traj.logits, labels)?;
    Ok(loss)
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-6 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

/// Compare BPTT gradients against central finite differences (h = 1e-5) on
/// one random small network with the smoothed forward pass.
///
/// `flip_sign` is a test hook that negates the analytic gradients so fault
/// injection can be verified end to end.
pub fn gradcheck_one(
    depth: usize,
    width: usize,
    t_steps: usize,
    seed: u64,
    surrogate: &SurrogateSpec,
    flip_sign: bool,
) -> Result<(f64, usize)> {
    let classes = 4.min(width.max(2));
    let lif = LifParams::new(0.6, 1.0, ResetMode::Soft)?;
    let net = NetworkSpec::mlp(width, width, depth.saturating_sub(1), classes, lif);
    let weights = initialize_network(&net, &InitScheme::Proposed, seed)?;
    let mut rng = Rng::from_seed(seed ^ 0xabcd);
    let batch = 2;
    let input = Matrix::from_vec(
        batch,
        width,
        rng.sample_gaussian(0.0, 1.0, batch * width)?,
    )?;
    let labels: Vec<usize> = (0..batch)
        .map(|_| (rng.next_u64() % classes as u64) as usize)
        .collect();

    let traj = forward_unrolled(&net, &weights, &input, t_steps, ForwardMode::Smoothed, surrogate)?;
    let (_, dlogits, _) = spike_count_cross_entropy(&traj.logits, &labels)?;
    let mut grads = bptt_backward(&net, &weights, &input, &traj, &dlogits, surrogate, false)?;
    if flip_sign {
        for g in grads.iter_mut() {
            for v in g.iter_mut() {
                *v = -*v;
            }
        }
    }

    let h = 1e-5;
    let mut max_err: f64 = 0.0;
    let mut checked = 0;
    for wi in 0..weights.len() {
        for pi in 0..weights[wi].num_params() {
            let orig = weights[wi].values_flat()[pi];
            let mut w_plus = weights.clone();
            w_plus[wi].values_mut()[pi] = orig + h;
            let mut w_minus = weights.clone();
            w_minus[wi].values_mut()[pi] = orig - h;
            let fd = (loss_of(&net, &w_plus, &input, &labels, t_steps, surrogate)?
                - loss_of(&net, &w_minus, &input, &labels, t_steps, surrogate)?)
                / (2.0 * h);
            max_err = max_err.max(rel_err(grads[wi][pi], fd));
            checked += 1;
        }
    }
    Ok((max_err, checked))
}

/// The full suite: >= 10 random (depth <= 3, width <= 8, T <= 3) networks.
pub fn gradcheck_suite(surrogate: &SurrogateSpec, flip_sign: bool) -> Result<GradcheckReport> {
    let cases = [
        (1usize, 4usize, 1usize),
        (1, 8, 2),
        (2, 4, 2),
        (2, 6, 3),
        (2, 8, 1),
        (3, 4, 1),
        (3, 5, 2),
        (3, 8, 2),
        (3, 6, 3),
        (3, 8, 3),
        (2, 3, 3),
        (1, 2, 3),
    ];
    let mut max_err: f64 = 0.0;
    let mut params = 0;
    for (i, &(depth, width, t)) in cases.iter().enumerate() {
        let (err, n) = gradcheck_one(depth, width, t, 1000 + i as u64, surrogate, flip_sign)?;
        max_err = max_err.max(err);
        params += n;
    }
    Ok(GradcheckReport {
        max_relative_error: max_err,
        networks_checked: cases.len(),
        params_checked: params,
    })
}
