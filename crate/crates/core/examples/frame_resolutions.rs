//! Delay/Doppler resolution of a frame and the speed each Doppler bin covers.
//!
//! Run with `cargo run --example frame_resolutions`.

use otfs::grid::FrameGrid;

fn main() -> otfs::Result<()> {
    let cases = [
        ("15 MHz, 1024 x 16", FrameGrid::new(1024, 16, 15e6 / 1024.0, 3e9)?, 1),
        ("5 kHz, 30 x 20", FrameGrid::new(30, 20, 5e3, 3e9)?, 3),
        ("5 kHz, 8 x 16", FrameGrid::new(8, 16, 5e3, 3e9)?, 2),
    ];
    println!("{:<20} {:>12} {:>12} {:>12} {:>14}", "grid", "delay [us]", "doppler [Hz]", "dv [m/s]", "v(k_max) [km/h]");
    for (name, grid, k_max) in cases {
        let r = grid.resolutions();
        println!(
            "{:<20} {:>12.3} {:>12.2} {:>12.2} {:>14.1}",
            name,
            r.delay * 1e6,
            r.doppler,
            r.speed,
            grid.max_speed(k_max) * 3.6
        );
    }
    Ok(())
}
