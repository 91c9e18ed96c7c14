use num_complex::Complex64;

use super::{DetectionReport, NoiseModel};
use crate::error::{Error, Result};
use crate::grid::{Constellation, DdFrame, TfFrame};
use crate::transforms::{vectorize, CMatrix, TransformPlan};

/// Dense MMSE detector `x_hat = H^H (H H^H + C_z)^{-1} y`.
pub fn mmse_detect(y: &DdFrame, h: &CMatrix, noise: &NoiseModel, c: &Constellation) -> Result<DetectionReport> {
    let mn = y.len();
    if h.nrows() != mn || h.ncols() != mn {
        return Err(Error::shape(format!("{mn}x{mn}"), format!("{}x{}", h.nrows(), h.ncols())));
    }
    let cz = noise.dense_covariance()?;
    let a = h * h.adjoint() + cz;
    let rhs = vectorize(y);
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("H H^H + C_z is not invertible".into()))?;
    let x = h.adjoint() * sol;
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular("MMSE solve produced non-finite values".into()));
    }
    let soft = DdFrame::from_vec(y.rows(), y.cols(), x.as_slice().to_vec())?;
    Ok(DetectionReport::from_soft(soft, c))
}

/// Per-cell TF equalizer `G* / (|G|^2 + N0 |V|^2)` for a link whose
/// end-to-end TF diagonal is `G = V U H`.
pub fn mmse_tf_diagonal(g: &TfFrame, rx: &TfFrame, n0: f64) -> Result<TfFrame> {
    if !g.same_shape(rx) {
        return Err(Error::shape(format!("{}x{}", g.rows(), g.cols()), format!("{}x{}", rx.rows(), rx.cols())));
    }
    let vals = g
        .as_slice()
        .iter()
        .zip(rx.as_slice())
        .map(|(&gi, &vi)| {
            let den = gi.norm_sqr() + n0 * vi.norm_sqr();
            if den > 0.0 {
                gi.conj() / den
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    TfFrame::from_vec(g.rows(), g.cols(), vals)
}

/// Fast MMSE for a channel that is diagonal in the TF domain.
///
/// The DD channel matrix is `A diag(G) A^H` and the noise covariance
/// `N0 A diag(|V|^2) A^H`, so the MMSE filter is the per-cell equalizer of
/// [`mmse_tf_diagonal`] sandwiched between ISFFT and SFFT. It equals
/// [`mmse_detect`] exactly.
pub fn mmse_detect_tf(
    plan: &TransformPlan,
    y: &DdFrame,
    g: &TfFrame,
    rx: &TfFrame,
    n0: f64,
    c: &Constellation,
) -> Result<DetectionReport> {
    if n0 <= 0.0 && g.as_slice().iter().any(|v| v.norm_sqr() == 0.0) {
        return Err(Error::Singular("noiseless MMSE with a zero TF channel gain".into()));
    }
    let eq = mmse_tf_diagonal(g, rx, n0)?;
    let soft = plan.sfft(&plan.isfft(y)?.hadamard(&eq)?)?;
    Ok(DetectionReport::from_soft(soft, c))
}

/// Dense MMSE error covariance `I - H^H (H H^H + C_z)^{-1} H`.
pub fn error_covariance(h: &CMatrix, noise: &NoiseModel) -> Result<CMatrix> {
    let mn = h.nrows();
    let a = h * h.adjoint() + noise.dense_covariance()?;
    let inv = a
        .try_inverse()
        .ok_or_else(|| Error::Singular("H H^H + C_z is not invertible".into()))?;
    Ok(CMatrix::identity(mn, mn) - h.adjoint() * inv * h)
}

/// Mean detection MSE `(1/MN) sum 1 / (lambda x + 1)` for eigen-gains
/// `lambda = |H|^2 / N0` and TX powers `x = |U|^2`.
pub fn analytic_detection_mse(lambda: &[f64], x: &[f64]) -> Result<f64> {
    if lambda.len() != x.len() {
        return Err(Error::shape(lambda.len(), x.len()));
    }
    if lambda.iter().chain(x).any(|&v| v < 0.0) {
        return Err(Error::NegativeInput("gains and powers must be non-negative".into()));
    }
    if lambda.is_empty() {
        return Err(Error::invalid("empty gain vector"));
    }
    Ok(lambda.iter().zip(x).map(|(l, xi)| 1.0 / (l * xi + 1.0)).sum::<f64>() / lambda.len() as f64)
}
