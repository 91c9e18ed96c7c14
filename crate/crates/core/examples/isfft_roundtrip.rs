//! ISFFT/SFFT on a random QPSK frame: round trip, energy, and agreement
//! with the dense Kronecker operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use otfs::grid::{Constellation, DdFrame, Modulation, TfFrame};
use otfs::transforms::{build_kron_operators, devectorize, vectorize, TransformPlan};

fn main() -> otfs::Result<()> {
    let (m, n) = (8, 6);
    let plan = TransformPlan::new(m, n);
    let c = Constellation::new(Modulation::Qpsk);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = DdFrame::from_fn(n, m, |_, _| c.point(rng.random_range(0..4)));

    let tf = plan.isfft(&x)?;
    let back = plan.sfft(&tf)?;
    println!("round trip error     {:.2e}", back.max_abs_diff(&x));
    println!("energy DD / TF       {:.6} / {:.6}", x.energy(), tf.energy());

    let ops = build_kron_operators(m, n)?;
    let dense: TfFrame = devectorize(&(&ops.a_mod * vectorize(&x)), n, m)?;
    println!("FFT vs Kronecker     {:.2e}", tf.max_abs_diff(&dense));
    Ok(())
}
