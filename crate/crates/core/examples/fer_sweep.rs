//! Frame-error-rate sweep from a config file.
//!
//! `cargo run --release --example fer_sweep -- configs/fer_mmse_optimal.toml`

use otfs::harness::{run_fer, ExperimentConfig};

fn main() -> otfs::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/fer_mmse_perfect_rect.toml").to_string());
    let cfg = ExperimentConfig::load(std::path::Path::new(&path))?;
    let out = run_fer(&cfg)?;
    for r in out.rows.iter().filter(|r| r.metric == "fer") {
        println!("{:>5} dB  FER {:.3e}  [{:.3e}, {:.3e}]  {} frames", r.snr_db, r.value, r.ci_lo, r.ci_hi, r.trials);
    }
    Ok(())
}
