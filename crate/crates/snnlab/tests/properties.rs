//! Property-based invariants across modules.

use proptest::prelude::*;

use snnlab::cli::fmt_g9;
use snnlab::data::{parse_idx_images, parse_idx_labels, serialize_idx_images, serialize_idx_labels};
use snnlab::init::{kaiming_variance, proposed_variance};
use snnlab::numerics::{std_normal_tail, Matrix};
use snnlab::snn::{lif_step, LayerState, LifParams, ResetMode};

proptest! {
    #[test]
    fn tail_symmetry_and_bounds(theta in -6.0f64..6.0) {
        let p = std_normal_tail(theta).unwrap();
        let q = std_normal_tail(-theta).unwrap();
        prop_assert!((p + q - 1.0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn tail_is_monotone(a in -6.0f64..6.0, b in -6.0f64..6.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(std_normal_tail(lo).unwrap() >= std_normal_tail(hi).unwrap());
    }

    #[test]
    fn proposed_dominates_kaiming(n in 1usize..5000, theta in 1e-3f64..3.0) {
        let proposed = proposed_variance(n, theta).unwrap();
        prop_assert!(proposed > kaiming_variance(n).unwrap());
    }

    #[test]
    fn soft_reset_charge_conservation(
        beta in 0.0f64..1.0,
        theta in 0.0f64..3.0,
        drive in proptest::collection::vec(-5.0f64..5.0, 1..40),
        prev in proptest::collection::vec(-5.0f64..5.0, 1..40),
    ) {
        // u_new - beta*u_prev + theta*x_prev == drive, elementwise
        let width = drive.len().min(prev.len());
        let drive = &drive[..width];
        let params = LifParams::new(beta, theta, ResetMode::Soft).unwrap();
        let mut state = LayerState::zeros(width);
        state.u.copy_from_slice(&prev[..width]);
        let u_before = state.u.clone();
        let x_before = state.x_prev.clone();
        lif_step(&mut state, drive, &params).unwrap();
        for i in 0..width {
            let recon = state.u[i] - params.beta * u_before[i] + params.theta * x_before[i];
            prop_assert!((recon - drive[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn spikes_are_binary_and_thresholded(
        drive in proptest::collection::vec(-5.0f64..5.0, 1..40),
        theta in 0.0f64..2.0,
    ) {
        let params = LifParams::new(0.5, theta, ResetMode::None).unwrap();
        let mut state = LayerState::zeros(drive.len());
        let spikes = lif_step(&mut state, &drive, &params).unwrap();
        for (i, &s) in spikes.iter().enumerate() {
            prop_assert!(s == 0.0 || s == 1.0);
            prop_assert_eq!(s == 1.0, state.u[i] > theta);
        }
    }

    #[test]
    fn csv_float_round_trip(v in -1e12f64..1e12) {
        let back: f64 = fmt_g9(v).parse().unwrap();
        let tol = 1e-8 * v.abs().max(1e-300);
        prop_assert!((back - v).abs() <= tol, "{} -> {}", v, fmt_g9(v));
    }

    #[test]
    fn idx_round_trip(
        pixels in proptest::collection::vec(0u8..=255, 1568),
        labels in proptest::collection::vec(0u8..=9, 1..=2),
    ) {
        let n = labels.len();
        let data: Vec<f64> = pixels[..n * 784].iter().map(|&b| b as f64).collect();
        let images = Matrix::from_vec(n, 784, data).unwrap();
        let img_bytes = serialize_idx_images(&images, 28, 28).unwrap();
        let (parsed, rows, cols) = parse_idx_images(&img_bytes).unwrap();
        prop_assert_eq!((rows, cols), (28, 28));
        prop_assert_eq!(serialize_idx_images(&parsed, 28, 28).unwrap(), img_bytes);
        let labels_usize: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
        let lab_bytes = serialize_idx_labels(&labels_usize).unwrap();
        prop_assert_eq!(parse_idx_labels(&lab_bytes).unwrap(), labels_usize);
    }
}
