//! Sum-product detection of a BPSK frame over a truncated effective channel.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use otfs::channel::{effective_dd_channel, sample_channel, ChannelProfile};
use otfs::detection::{count_errors, spa_detect, SpaConfig};
use otfs::grid::{Constellation, DdFrame, FrameGrid, Modulation};
use otfs::transforms::TransformPlan;
use otfs::windows::WindowPair;

fn main() -> otfs::Result<()> {
    let (m, n) = (8, 16);
    let grid = FrameGrid::new(m, n, 5e3, 3e9)?;
    let plan = TransformPlan::new(m, n);
    let c = Constellation::new(Modulation::Bpsk);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let prof = ChannelProfile { paths: 2, k_max: 2, l_max: 2, fractional: false };
    let ch = sample_channel(&grid, &prof, &mut rng)?;
    let hw = effective_dd_channel(&plan, &ch, &WindowPair::rectangular(n, m))?;

    let idx: Vec<usize> = (0..m * n).map(|_| rng.random_range(0..2)).collect();
    let x = DdFrame::from_vec(n, m, idx.iter().map(|&i| c.point(i)).collect())?;
    let n0 = 0.05;
    let clean = hw.apply(&plan, &x)?;
    let sd = (n0 / 2.0f64).sqrt();
    let y = DdFrame::from_fn(n, m, |k, l| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        clean[(k, l)] + Complex64::new(re, im) * sd
    });

    let taps = hw.truncate(2)?;
    let cells: Vec<usize> = (0..m * n).collect();
    let r = spa_detect(&y, &taps, &DdFrame::zeros(n, m), &cells, n0, &c, &SpaConfig::default())?;
    let errs = count_errors(&r.report.hard, &idx, &c, None)?;
    println!("{} taps kept, residual energy {:.2e}", taps.taps.len(), taps.residual_energy);
    println!("iterations {}, bit errors {} / {}", r.iterations, errs.bit_errors, errs.bits);
    Ok(())
}
