use crate::error::{Error, Result};

/// First/second moment estimates for a list of parameter tensors.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(param_sizes: &[usize], beta1: f64, beta2: f64, eps: f64) -> Self {
        AdamState {
            beta1,
            beta2,
            eps,
            m: param_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: param_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }
}

/// Standard Adam update with bias correction. `params` and `grads` are
/// parallel lists of flat tensors.
pub fn adam_step(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Shape("adam_step: tensor count mismatch".into()));
    }
    state.step += 1;
    let t = state.step as f64;
    let bc1 = 1.0 - state.beta1.powf(t);
    let bc2 = 1.0 - state.beta2.powf(t);
    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads.iter())
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        if p.len() != g.len() || p.len() != m.len() {
            return Err(Error::Shape("adam_step: tensor size mismatch".into()));
        }
        for i in 0..p.len() {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut p = vec![1.0, -2.0, 3.0];
        let g = vec![0.0; 3];
        let mut state = AdamState::new(&[3], 0.9, 0.999, 1e-8);
        adam_step(&mut [&mut p], &[&g], &mut state, 1e-3).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn constant_gradient_step_tends_to_lr() {
        let mut p = vec![0.0];
        let g = vec![0.7];
        let mut state = AdamState::new(&[1], 0.9, 0.999, 1e-8);
        let lr = 1e-3;
        for _ in 0..500 {
            adam_step(&mut [&mut p], &[&g], &mut state, lr).unwrap();
        }
        let before = p[0];
        adam_step(&mut [&mut p], &[&g], &mut state, lr).unwrap();
        let step = (p[0] - before).abs();
        assert!((step - lr).abs() < 0.05 * lr, "step {step}");
    }

    /// Independent reference implementation, written against the published
    /// update equations directly.
    fn reference_adam(
        p0: &[f64],
        grad_fn: impl Fn(&[f64]) -> Vec<f64>,
        steps: usize,
        lr: f64,
    ) -> Vec<f64> {
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        let mut p = p0.to_vec();
        let mut m = vec![0.0; p.len()];
        let mut v = vec![0.0; p.len()];
        for t in 1..=steps {
            let g = grad_fn(&p);
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let mh = m[i] / (1.0 - b1.powi(t as i32));
                let vh = v[i] / (1.0 - b2.powi(t as i32));
                p[i] -= lr * mh / (vh.sqrt() + eps);
            }
        }
        p
    }

    #[test]
    fn five_steps_on_quadratic_match_reference() {
        // f(p) = sum((p - c)^2), grad = 2 (p - c)
        let c = [1.0, -0.5, 2.0];
        let grad_fn = |p: &[f64]| p.iter().zip(c.iter()).map(|(a, b)| 2.0 * (a - b)).collect();
        let want = reference_adam(&[0.0, 0.0, 0.0], grad_fn, 5, 0.1);
        let mut p = vec![0.0, 0.0, 0.0];
        let mut state = AdamState::new(&[3], 0.9, 0.999, 1e-8);
        for _ in 0..5 {
            let g: Vec<f64> = p.iter().zip(c.iter()).map(|(a, b)| 2.0 * (a - b)).collect();
            adam_step(&mut [&mut p], &[&g], &mut state, 0.1).unwrap();
        }
        for (a, b) in p.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
