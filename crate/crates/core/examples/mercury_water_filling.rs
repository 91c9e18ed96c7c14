//! Optimal TX power allocation over nine TF cells: water level, mercury
//! level and the resulting detection MSE against a uniform window.

use otfs::detection::analytic_detection_mse;
use otfs::windows::optimal_tx_window;

fn main() -> otfs::Result<()> {
    let lambda = [0.05, 0.4, 1.0, 2.5, 4.0, 8.0, 15.0, 30.0, 60.0];
    let a = optimal_tx_window(&lambda)?;
    println!("1/sqrt(eta) = {:.4}", 1.0 / a.eta.sqrt());
    println!("{:>8} {:>10} {:>10}", "lambda", "mercury", "power");
    for ((l, hg), x) in lambda.iter().zip(&a.mercury).zip(&a.x) {
        println!("{l:>8.2} {hg:>10.4} {x:>10.4}");
    }
    let opt = analytic_detection_mse(&lambda, &a.x)?;
    let uni = analytic_detection_mse(&lambda, &[1.0; 9])?;
    println!("MSE optimal {opt:.5}  uniform {uni:.5}  (KKT residual {:.1e})", a.kkt_residual);
    Ok(())
}
