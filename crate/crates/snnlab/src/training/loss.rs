use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Softmax cross-entropy on per-class output-spike counts.
///
/// `logits` holds the spike counts summed over time, [batch x classes].
/// Returns (mean loss, gradient w.r.t. logits already divided by batch,
/// accuracy). Prediction is the argmax count with ties resolved toward the
/// lowest class index.
pub fn spike_count_cross_entropy(
    logits: &Matrix,
    labels: &[usize],
) -> Result<(f64, Matrix, f64)> {
    let classes = logits.cols();
    if classes < 2 {
        return Err(Error::Parameter(format!(
            "cross entropy needs >= 2 classes, got {classes}"
        )));
    }
    if logits.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} logit rows vs {} labels",
            logits.rows(),
            labels.len()
        )));
    }
    let batch = logits.rows();
    let mut grad = Matrix::zeros(batch, classes);
    let mut loss = 0.0;
    let mut correct = 0usize;
    for b in 0..batch {
        let label = labels[b];
        if label >= classes {
            return Err(Error::Data(format!(
                "label {label} out of range for {classes} classes (row {b})"
            )));
        }
        let row = logits.row(b);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for &v in row {
            z += (v - max).exp();
        }
        loss += z.ln() + max - row[label];
        // strict > keeps the first (lowest-index) maximum
        let mut argmax = 0;
        for (c, &v) in row.iter().enumerate() {
            if v > row[argmax] {
                argmax = c;
            }
        }
        if argmax == label {
            correct += 1;
        }
        for c in 0..classes {
            let p = (row[c] - max).exp() / z;
            grad.set(b, c, (p - if c == label { 1.0 } else { 0.0 }) / batch as f64);
        }
    }
    Ok((loss / batch as f64, grad, correct as f64 / batch as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn perfect_one_hot_counts() {
        // counts = T for the correct class, 0 elsewhere; C=10, T=3
        let t = 3.0;
        let classes = 10;
        let mut logits = Matrix::zeros(1, classes);
        logits.set(0, 0, t);
        let (loss, _, acc) = spike_count_cross_entropy(&logits, &[0]).unwrap();
        let want = -((t.exp()) / (t.exp() + (classes - 1) as f64)).ln();
        assert!((loss - want).abs() < 1e-12);
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn uniform_counts_give_log_c() {
        let logits = Matrix::from_vec(2, 4, vec![1.0; 8]).unwrap();
        let (loss, _, acc) = spike_count_cross_entropy(&logits, &[0, 3]).unwrap();
        assert!((loss - (4.0f64).ln()).abs() < 1e-12);
        // ties break to class 0
        assert_eq!(acc, 0.5);
    }

    #[test]
    fn matches_hand_rolled_oracle() {
        let mut rng = Rng::from_seed(19);
        let logits = Matrix::from_vec(4, 5, rng.sample_gaussian(0.0, 2.0, 20).unwrap()).unwrap();
        let labels = [2, 0, 4, 1];
        let (loss, grad, _) = spike_count_cross_entropy(&logits, &labels).unwrap();
        // oracle: direct definition without the max-shift trick
        let mut want_loss = 0.0;
        for b in 0..4 {
            let row = logits.row(b);
            let z: f64 = row.iter().map(|v| v.exp()).sum();
            want_loss += -(row[labels[b]].exp() / z).ln();
            for c in 0..5 {
                let p = row[c].exp() / z;
                let want_g = (p - if c == labels[b] { 1.0 } else { 0.0 }) / 4.0;
                assert!((grad.get(b, c) - want_g).abs() < 1e-12);
            }
        }
        assert!((loss - want_loss / 4.0).abs() < 1e-12);
    }

    #[test]
    fn label_out_of_range() {
        let logits = Matrix::zeros(1, 3);
        assert!(spike_count_cross_entropy(&logits, &[3]).is_err());
    }

    #[test]
    fn batch_permutation_equivariance() {
        let mut rng = Rng::from_seed(23);
        let data = rng.sample_gaussian(0.0, 1.0, 15).unwrap();
        let logits = Matrix::from_vec(3, 5, data.clone()).unwrap();
        let labels = [1, 4, 2];
        let (loss, grad, acc) = spike_count_cross_entropy(&logits, &labels).unwrap();
        // permute rows 0<->2
        let mut permuted = Vec::new();
        permuted.extend_from_slice(&data[10..15]);
        permuted.extend_from_slice(&data[5..10]);
        permuted.extend_from_slice(&data[0..5]);
        let logits_p = Matrix::from_vec(3, 5, permuted).unwrap();
        let (loss_p, grad_p, acc_p) = spike_count_cross_entropy(&logits_p, &[2, 4, 1]).unwrap();
        assert!((loss - loss_p).abs() < 1e-12);
        assert_eq!(acc, acc_p);
        for c in 0..5 {
            assert!((grad.get(0, c) - grad_p.get(2, c)).abs() < 1e-12);
            assert!((grad.get(2, c) - grad_p.get(0, c)).abs() < 1e-12);
        }
    }
}
