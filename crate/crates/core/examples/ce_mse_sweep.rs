//! Channel-estimation MSE sweep from a config file, printed as CSV.
//!
//! `cargo run --release --example ce_mse_sweep -- configs/ce_dc_tx.toml`

use otfs::harness::output::{ce_rows_to_csv, rows_to_csv};
use otfs::harness::{run_ce_mse, ExperimentConfig};

fn main() -> otfs::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/ce_rect_khat1.toml").to_string());
    let mut cfg = ExperimentConfig::load(std::path::Path::new(&path))?;
    cfg.trials = cfg.trials.min(200);
    let out = run_ce_mse(&cfg)?;
    print!("{}", rows_to_csv(&out.rows));
    println!();
    print!("{}", ce_rows_to_csv(&out.ce_rows));
    Ok(())
}
