//! Embedded-pilot channel estimation on one frame, with the analytic floor
//! for comparison.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use otfs::channel::effective_from_tf;
use otfs::estimation::{estimate_channel, measured_ce_mse};
use otfs::harness::config::ExperimentConfig;
use otfs::harness::experiment::LinkSetup;

fn main() -> otfs::Result<()> {
    let cfg = ExperimentConfig::from_toml(
        r#"
experiment = "ce-mse"
m = 30
n = 20
paths = 5
k_max = 3
l_max = 4
k_hat = 1
pilot_dbw = 30.0
snr_db = [40.0]
"#,
    )?;
    let setup = LinkSetup::new(&cfg)?;
    let layout = &setup.layout;
    println!(
        "pilot at ({}, {}), guard {} cells, {} data cells",
        layout.k_p,
        layout.l_p,
        layout.overhead(),
        setup.data_cells.len()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = setup.simulate(&mut rng, 40.0)?;
    let truth = effective_from_tf(&setup.plan, &t.g)?;
    let est = estimate_channel(&t.y, layout, t.n0)?;
    let mse = measured_ce_mse(&truth, &est, layout);
    println!("read-window MSE {mse:.3e}");
    println!("x 1/|x_p|^2 floor {:.3e}", otfs::estimation::pilot_scaled_mse_floor(layout, setup.sidelobe));
    Ok(())
}
