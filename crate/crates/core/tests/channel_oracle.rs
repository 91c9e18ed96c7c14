use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use otfs::channel::{
    dd_channel_matrix, dd_filter_w, effective_dd_channel, effective_dd_channel_direct, rect_filter_closed_form,
    sample_channel, tf_channel, time_channel, ChannelProfile, ChannelRealization, PathSpec,
};
use otfs::detection::noise_covariance;
use otfs::grid::{DdFrame, FrameGrid};
use otfs::transforms::{devectorize, vectorize, TransformPlan};
use otfs::windows::{Window, WindowPair};

fn rand_window(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Window {
    Window::Separable {
        doppler: (0..n).map(|_| Complex64::new(rng.random_range(0.1..1.5), rng.random_range(-1.0..1.0))).collect(),
        delay: (0..m).map(|_| Complex64::new(rng.random_range(0.1..1.5), rng.random_range(-1.0..1.0))).collect(),
    }
}

fn profile(n: usize, m: usize, paths: usize) -> ChannelProfile {
    ChannelProfile {
        paths,
        k_max: (n - 1) / 2,
        l_max: m - 1,
        fractional: true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_chain_equals_dense_matrix(seed in any::<u64>(), mi in 0usize..2, ni in 0usize..2, paths in 1usize..5) {
        let (m, n) = ([4, 8][mi], [4, 8][ni]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = FrameGrid::new(m, n, 5e3, 3e9).unwrap();
        let plan = TransformPlan::new(m, n);
        let ch = sample_channel(&grid, &profile(n, m, paths), &mut rng).unwrap();
        let w = WindowPair::new(rand_window(&mut rng, n, m), rand_window(&mut rng, n, m)).unwrap();
        let x = DdFrame::from_fn(n, m, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let g = tf_channel(&ch).hadamard(&w.joint()).unwrap();
        let fast = plan.sfft(&plan.isfft(&x).unwrap().hadamard(&g).unwrap()).unwrap();
        let dense: DdFrame = devectorize(&(dd_channel_matrix(&ch, &w).unwrap() * vectorize(&x)), n, m).unwrap();
        prop_assert!(fast.max_abs_diff(&dense) < 1e-9);
    }

    #[test]
    fn effective_channel_is_periodic(seed in any::<u64>(), k in -40i64..40, l in -40i64..40) {
        let (m, n) = (6, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = FrameGrid::new(m, n, 5e3, 3e9).unwrap();
        let ch = sample_channel(&grid, &profile(n, m, 3), &mut rng).unwrap();
        let hw = effective_dd_channel(&TransformPlan::new(m, n), &ch, &WindowPair::rectangular(n, m)).unwrap();
        let (ni, mi) = (n as i64, m as i64);
        prop_assert_eq!(hw.at(k, l), hw.at(k + ni, l + mi));
        prop_assert_eq!(hw.at(k, l), hw.at(k - 3 * ni, l - 2 * mi));
    }

    #[test]
    fn fft_and_direct_effective_channel_agree(seed in any::<u64>()) {
        let (m, n) = (5, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = FrameGrid::new(m, n, 5e3, 3e9).unwrap();
        let ch = sample_channel(&grid, &profile(n, m, 3), &mut rng).unwrap();
        let w = WindowPair::new(rand_window(&mut rng, n, m), rand_window(&mut rng, n, m)).unwrap();
        let a = effective_dd_channel(&TransformPlan::new(m, n), &ch, &w).unwrap();
        let b = effective_dd_channel_direct(&ch, &w).unwrap();
        prop_assert!(a.taps.max_abs_diff(&b.taps) < 1e-10);
    }
}

#[test]
fn rectangular_filter_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for &(n, m) in &[(20usize, 30usize), (16, 8), (7, 5)] {
        let w = WindowPair::rectangular(n, m);
        for _ in 0..1000 {
            let dk = rng.random_range(-(n as f64)..n as f64);
            let dl = rng.random_range(-(m as f64)..m as f64);
            let err = (dd_filter_w(&w, dk, dl) - rect_filter_closed_form(n, m, dk, dl)).norm();
            assert!(err < 1e-10, "N={n} M={m} dk={dk} dl={dl}: {err}");
        }
    }
}

#[test]
fn unit_modulus_rx_window_keeps_the_information_matrix() {
    // H^H C_z^{-1} H does not change for a phase-only RX window.
    let (m, n) = (4, 4);
    let grid = FrameGrid::new(m, n, 5e3, 3e9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(239);
    let ch = sample_channel(&grid, &profile(n, m, 3), &mut rng).unwrap();
    let n0 = 0.2;
    let info = |w: &WindowPair| {
        let h = dd_channel_matrix(&ch, w).unwrap();
        let c = noise_covariance(&w.rx.to_grid(), n0).unwrap().dense_covariance().unwrap();
        h.adjoint() * c.try_inverse().unwrap() * h
    };
    let phases = Window::Grid(otfs::grid::TfFrame::from_fn(n, m, |_, _| Complex64::from_polar(1.0, rng.random_range(0.0..6.3))));
    let a = info(&WindowPair::rectangular(n, m));
    let b = info(&WindowPair::new(Window::rectangular(n, m), phases).unwrap());
    assert!((a - b).norm() < 1e-9);
}

#[test]
fn time_domain_channel_is_unitarily_equivalent_to_tf_diagonal() {
    // Conjugating the diagonal TF channel by I_N (x) F_M^H gives the time-domain
    // block-diagonal operator; its Frobenius norm equals the diagonal's energy.
    let (m, n) = (4, 3);
    let grid = FrameGrid::new(m, n, 5e3, 3e9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ch = sample_channel(&grid, &profile(n, m, 2), &mut rng).unwrap();
    let h_tf = tf_channel(&ch);
    let h_t = time_channel(&h_tf).unwrap();
    assert!((h_t.norm_squared() - h_tf.energy()).abs() < 1e-10);
}

#[test]
fn equal_delay_paths_are_allowed() {
    let grid = FrameGrid::new(8, 8, 5e3, 3e9).unwrap();
    let paths = vec![
        PathSpec::new(Complex64::new(1.0, 0.0), 2, 1, 0.2).unwrap(),
        PathSpec::new(Complex64::new(0.0, 1.0), 2, -1, -0.3).unwrap(),
    ];
    let ch = ChannelRealization::new(grid, paths);
    let text = ch.to_record();
    assert_eq!(ChannelRealization::from_record(grid, &text).unwrap(), ch);
}

#[test]
fn sampled_gains_follow_the_delay_profile() {
    // E|h_i|^2 = q(l_i); average over many draws of a single-path-per-delay profile.
    let grid = FrameGrid::new(8, 16, 5e3, 3e9).unwrap();
    let prof = ChannelProfile {
        paths: 2,
        k_max: 2,
        l_max: 4,
        fractional: true,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut ratio_sum, mut count) = (0.0, 0usize);
    for _ in 0..20_000 {
        let ch = sample_channel(&grid, &prof, &mut rng).unwrap();
        for (p, q) in ch.paths.iter().zip(ch.path_variances()) {
            ratio_sum += p.h.norm_sqr() / q;
            count += 1;
        }
        for p in &ch.paths {
            assert!(p.l_tau <= 4 && p.k_nu.abs() <= 2 && p.kappa > -0.5 && p.kappa < 0.5);
        }
    }
    let mean = ratio_sum / count as f64;
    assert!((mean - 1.0).abs() < 0.03, "normalized gain {mean}");
}
