//! Dolph-Chebyshev window design: coefficients, measured sidelobe level and
//! mainlobe width for a few attenuation targets.

use otfs::windows::{dc_window, sidelobe_formula_db};

fn main() -> otfs::Result<()> {
    let n = 20;
    for sl in [-20.0, -30.0, -40.0, -60.0] {
        let w = dc_window(n, sl)?;
        println!(
            "target {sl:>5.1} dB  measured {:>7.2} dB  k_main {:.3}  formula at k_main {:>7.2} dB",
            w.measured_sidelobe_db,
            w.k_main,
            sidelobe_formula_db(n, w.k_main)
        );
    }
    let w = dc_window(n, -40.0)?;
    let coeffs: Vec<String> = w.coeffs.iter().map(|c| format!("{c:.4}")).collect();
    println!("\n-40 dB coefficients:\n{}", coeffs.join(" "));
    Ok(())
}
