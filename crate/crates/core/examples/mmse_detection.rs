//! MMSE detection of one QPSK frame with perfect CSI: the fast TF-domain
//! solver against the dense matrix solve.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use otfs::channel::{dd_channel_matrix, sample_channel, tf_channel, ChannelProfile};
use otfs::detection::{count_errors, mmse_detect, mmse_detect_tf, noise_covariance};
use otfs::grid::{Constellation, DdFrame, FrameGrid, Modulation, TfFrame};
use otfs::transforms::TransformPlan;
use otfs::windows::WindowPair;

fn main() -> otfs::Result<()> {
    let (m, n) = (8, 8);
    let grid = FrameGrid::new(m, n, 5e3, 3e9)?;
    let plan = TransformPlan::new(m, n);
    let c = Constellation::new(Modulation::Qpsk);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let prof = ChannelProfile { paths: 4, k_max: 2, l_max: 3, fractional: true };
    let ch = sample_channel(&grid, &prof, &mut rng)?;
    let w = WindowPair::rectangular(n, m);

    let idx: Vec<usize> = (0..m * n).map(|_| rng.random_range(0..4)).collect();
    let x = DdFrame::from_vec(n, m, idx.iter().map(|&i| c.point(i)).collect())?;
    let n0 = 10f64.powf(-1.5);
    let g = tf_channel(&ch);
    let rx = plan.isfft(&x)?.hadamard(&g)?;
    let sd = (n0 / 2.0).sqrt();
    let noisy = TfFrame::from_vec(
        n,
        m,
        rx.as_slice()
            .iter()
            .map(|s| s + Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)) * sd)
            .collect(),
    )?;
    let y = plan.sfft(&noisy)?;

    let fast = mmse_detect_tf(&plan, &y, &g, &w.rx.to_grid(), n0, &c)?;
    let dense = mmse_detect(&y, &dd_channel_matrix(&ch, &w)?, &noise_covariance(&w.rx.to_grid(), n0)?, &c)?;
    let errs = count_errors(&fast.hard, &idx, &c, None)?;
    println!("fast vs dense soft estimates {:.2e}", fast.soft.max_abs_diff(&dense.soft));
    println!("symbol errors {} / {}, per-symbol MSE {:.4}", errs.symbol_errors, errs.symbols, fast.empirical_mse(&x, None));
    Ok(())
}
