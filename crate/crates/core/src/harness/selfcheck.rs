//! Cross-oracle self check: every fast path against its dense counterpart
//! on small random instances.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{
    convolution_matrix, dd_channel_matrix, dd_filter_w, effective_dd_channel, effective_dd_channel_direct,
    rect_filter_closed_form, sample_channel, tf_channel, ChannelProfile, ChannelRealization,
};
use crate::detection::{analytic_detection_mse, error_covariance, mmse_detect, mmse_detect_tf, noise_covariance};
use crate::error::Result;
use crate::grid::{Constellation, DdFrame, FrameGrid, Modulation, TfFrame};
use crate::transforms::{build_kron_operators, devectorize, vectorize, TransformPlan};
use crate::windows::{dc_window, optimal_tx_window, Window, WindowPair};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed error.
    pub error: f64,
    pub tolerance: f64,
}

fn random_frame<D>(rng: &mut ChaCha8Rng, n: usize, m: usize) -> crate::grid::Frame<D> {
    crate::grid::Frame::from_fn(n, m, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_window(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Window {
    Window::Separable {
        doppler: (0..n).map(|_| Complex64::new(rng.random_range(0.2..1.5), rng.random_range(-0.5..0.5))).collect(),
        delay: (0..m).map(|_| Complex64::new(rng.random_range(0.2..1.5), rng.random_range(-0.5..0.5))).collect(),
    }
}

fn check(name: &'static str, error: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name,
        passed: error <= tolerance,
        error,
        tolerance,
    }
}

/// Runs the full suite.
pub fn run_selfcheck(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    // Transforms against the Kronecker operators, plus Parseval.
    let mut err: f64 = 0.0;
    let mut parseval: f64 = 0.0;
    for m in 2..=6 {
        for n in 2..=6 {
            let plan = TransformPlan::new(m, n);
            let ops = build_kron_operators(m, n)?;
            let x: DdFrame = random_frame(&mut rng, n, m);
            let fast = plan.isfft(&x)?;
            let dense: TfFrame = devectorize(&(&ops.a_mod * vectorize(&x)), n, m)?;
            err = err.max(fast.max_abs_diff(&dense));
            let back = plan.sfft(&fast)?;
            err = err.max(back.max_abs_diff(&x));
            parseval = parseval.max((fast.energy() - x.energy()).abs() / x.energy());
        }
    }
    out.push(check("isfft/sfft vs Kronecker oracle", err, 1e-9));
    out.push(check("Parseval", parseval, 1e-10));

    // Windowed channel chain against the dense DD matrix.
    let mut err: f64 = 0.0;
    let mut eff: f64 = 0.0;
    for &(m, n) in &[(4usize, 4usize), (4, 8), (8, 4), (8, 8)] {
        let grid = FrameGrid::new(m, n, 5e3, 3e9)?;
        let plan = TransformPlan::new(m, n);
        let prof = ChannelProfile {
            paths: 3,
            k_max: (n - 1) / 2,
            l_max: m - 1,
            fractional: true,
        };
        let ch = sample_channel(&grid, &prof, &mut rng)?;
        let w = WindowPair::new(random_window(&mut rng, n, m), random_window(&mut rng, n, m))?;
        let x: DdFrame = random_frame(&mut rng, n, m);
        let g = tf_channel(&ch).hadamard(&w.joint())?;
        let fast = plan.sfft(&plan.isfft(&x)?.hadamard(&g)?)?;
        let h_dd = dd_channel_matrix(&ch, &w)?;
        let dense: DdFrame = devectorize(&(&h_dd * vectorize(&x)), n, m)?;
        err = err.max(fast.max_abs_diff(&dense));
        let hw = effective_dd_channel(&plan, &ch, &w)?;
        let direct = effective_dd_channel_direct(&ch, &w)?;
        eff = eff.max(hw.taps.max_abs_diff(&direct.taps));
        let conv = convolution_matrix(&hw.taps)?;
        eff = eff.max((conv - h_dd).norm());
    }
    out.push(check("TF chain vs dense DD channel matrix", err, 1e-9));
    out.push(check("effective channel: FFT vs direct vs convolution", eff, 1e-9));

    // Rectangular closed form.
    let w = WindowPair::rectangular(16, 8);
    let mut err: f64 = 0.0;
    for _ in 0..200 {
        let dk = rng.random_range(-8.0..8.0);
        let dl = rng.random_range(-4.0..4.0);
        err = err.max((dd_filter_w(&w, dk, dl) - rect_filter_closed_form(16, 8, dk, dl)).norm());
    }
    out.push(check("rectangular DD filter closed form", err, 1e-10));

    // MMSE: fast TF path vs dense solve, RX-window invariance, analytic trace.
    let (m, n) = (4usize, 4usize);
    let grid = FrameGrid::new(m, n, 5e3, 3e9)?;
    let plan = TransformPlan::new(m, n);
    let c = Constellation::new(Modulation::Qpsk);
    let prof = ChannelProfile {
        paths: 3,
        k_max: 1,
        l_max: 3,
        fractional: true,
    };
    let ch = sample_channel(&grid, &prof, &mut rng)?;
    let n0 = 0.1;
    let rect = WindowPair::rectangular(n, m);
    let dcw = dc_window(n, -30.0)?;
    let windowed = WindowPair::new(Window::rectangular(n, m), Window::doppler_only(&dcw.coeffs, m))?;
    let x: DdFrame = random_frame(&mut rng, n, m);
    let z: TfFrame = random_frame(&mut rng, n, m);
    let mut err: f64 = 0.0;
    let mut invariance: f64 = 0.0;
    let mut estimates = Vec::new();
    for w in [&rect, &windowed] {
        let v = w.rx.to_grid();
        let g = tf_channel(&ch).hadamard(&w.joint())?;
        let vz: TfFrame = z.hadamard(&v)?;
        let y = plan.sfft(&plan.isfft(&x)?.hadamard(&g)?)?;
        let y = DdFrame::from_vec(n, m, y.as_slice().iter().zip(plan.sfft(&vz)?.as_slice()).map(|(a, b)| a + b).collect())?;
        let noise = noise_covariance(&v, n0)?;
        let dense = mmse_detect(&y, &dd_channel_matrix(&ch, w)?, &noise, &c)?;
        let fast = mmse_detect_tf(&plan, &y, &g, &v, n0, &c)?;
        err = err.max(dense.soft.max_abs_diff(&fast.soft));
        estimates.push(dense.soft);
    }
    invariance = invariance.max(estimates[0].max_abs_diff(&estimates[1]));
    out.push(check("MMSE fast TF path vs dense solve", err, 1e-9));
    out.push(check("MMSE invariance to the RX window", invariance, 1e-9));

    let h = tf_channel(&ch);
    let lambda: Vec<f64> = h.as_slice().iter().map(|v| v.norm_sqr() / n0).collect();
    let ones = vec![1.0; m * n];
    let analytic = analytic_detection_mse(&lambda, &ones)?;
    let e = error_covariance(&dd_channel_matrix(&ch, &rect)?, &noise_covariance(&rect.rx.to_grid(), n0)?)?;
    let trace = e.trace().re / (m * n) as f64;
    out.push(check("analytic detection MSE vs dense error covariance", (analytic - trace).abs(), 1e-9));

    // Optimal TX window.
    let alloc = optimal_tx_window(&lambda)?;
    out.push(check("optimal window budget residual", alloc.budget_residual, 1e-8));
    out.push(check("optimal window KKT residual", alloc.kkt_residual, 1e-6));
    let opt = analytic_detection_mse(&lambda, &alloc.x)?;
    out.push(check("optimal window not worse than uniform", (opt - analytic).max(0.0), 1e-12));

    // Integer-Doppler rectangular sparsity.
    let paths = vec![
        crate::channel::PathSpec::new(Complex64::new(0.8, 0.1), 1, 1, 0.0)?,
        crate::channel::PathSpec::new(Complex64::new(-0.3, 0.5), 2, -1, 0.0)?,
    ];
    let ch = ChannelRealization::new(grid, paths);
    let hw = effective_dd_channel(&plan, &ch, &rect)?;
    let power = (hw.energy() - ch.gain_energy()).abs();
    out.push(check("integer-Doppler power conservation", power, 1e-10));

    Ok(out)
}
