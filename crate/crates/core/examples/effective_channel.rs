//! Effective DD channel of one fractional-Doppler path under rectangular and
//! Dolph-Chebyshev windows: where the energy goes along the Doppler axis.

use num_complex::Complex64;

use otfs::channel::{effective_dd_channel, ChannelRealization, PathSpec};
use otfs::grid::FrameGrid;
use otfs::transforms::TransformPlan;
use otfs::windows::{dc_window, Window, WindowPair};

fn main() -> otfs::Result<()> {
    let (m, n) = (8, 20);
    let grid = FrameGrid::new(m, n, 5e3, 3e9)?;
    let plan = TransformPlan::new(m, n);
    let ch = ChannelRealization::new(grid, vec![PathSpec::new(Complex64::new(1.0, 0.0), 0, 2, 0.3)?]);

    let dc = dc_window(n, -40.0)?;
    let pairs = [
        ("rect", WindowPair::rectangular(n, m)),
        (
            "dc-tx",
            WindowPair::new(Window::doppler_only(&dc.coeffs, m).power_normalized()?, Window::rectangular(n, m))?,
        ),
    ];
    for (name, w) in pairs {
        let hw = effective_dd_channel(&plan, &ch, &w)?;
        let row: Vec<String> = (-8..=8).map(|k| format!("{:6.1}", 20.0 * hw.at(k, 0).norm().max(1e-12).log10())).collect();
        println!("{name:>6} |h_w[k,0]| dB, k=-8..8:");
        println!("       {}", row.join(""));
        println!(
            "       taps above -30 dB: {}, total energy {:.4}",
            hw.support(10f64.powf(-1.5)),
            hw.energy()
        );
    }
    Ok(())
}
