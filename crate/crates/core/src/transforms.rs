//! Symplectic finite Fourier transforms between the delay-Doppler and
//! time-frequency grids, plus dense Kronecker-DFT operators used as
//! small-scale oracles.
//!
//! Sign convention: `e^{-j 2 pi a b / n}` is the forward DFT. The ISFFT is an
//! inverse DFT along Doppler (`k -> n`) and a forward DFT along delay
//! (`l -> m`):
//!
//! ```text
//! X[n, m] = 1/sqrt(NM) sum_k sum_l x[k, l] e^{j 2 pi (n k / N - m l / M)}
//! ```
//!
//! The SFFT uses the conjugate exponents. Both are unitary.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{DdFrame, Frame, TfFrame};

/// Dense oracles are only built for frames with at most this many cells.
pub const ORACLE_MAX_CELLS: usize = 4096;

/// Dense complex matrix used by the oracle builders.
pub type CMatrix = DMatrix<Complex64>;

/// Precomputed FFT plans for one `N x M` frame size.
///
/// The plan is immutable after construction and can be shared read-only
/// across threads.
#[derive(Clone)]
pub struct TransformPlan {
    m: usize,
    n: usize,
    fwd_m: Arc<dyn Fft<f64>>,
    inv_m: Arc<dyn Fft<f64>>,
    fwd_n: Arc<dyn Fft<f64>>,
    inv_n: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TransformPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransformPlan").field("m", &self.m).field("n", &self.n).finish()
    }
}

impl TransformPlan {
    /// Plans transforms for `n` Doppler bins/time slots and `m` delay bins/subcarriers.
    pub fn new(m: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            n,
            fwd_m: planner.plan_fft_forward(m),
            inv_m: planner.plan_fft_inverse(m),
            fwd_n: planner.plan_fft_forward(n),
            inv_n: planner.plan_fft_inverse(n),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check<D>(&self, frame: &Frame<D>) -> Result<()> {
        if frame.rows() != self.n || frame.cols() != self.m {
            return Err(Error::shape(
                format!("{}x{}", self.n, self.m),
                format!("{}x{}", frame.rows(), frame.cols()),
            ));
        }
        Ok(())
    }

    /// Inverse SFFT: delay-Doppler frame to time-frequency frame.
    pub fn isfft(&self, x: &DdFrame) -> Result<TfFrame> {
        self.check(x)?;
        let mut data = x.as_slice().to_vec();
        self.apply_2d(&mut data, &self.inv_n, &self.fwd_m);
        TfFrame::from_vec(self.n, self.m, data)
    }

    /// SFFT: time-frequency frame to delay-Doppler frame.
    pub fn sfft(&self, y: &TfFrame) -> Result<DdFrame> {
        self.check(y)?;
        let mut data = y.as_slice().to_vec();
        self.apply_2d(&mut data, &self.fwd_n, &self.inv_m);
        DdFrame::from_vec(self.n, self.m, data)
    }

    /// Runs `col_fft` down every column (length `n`) and `row_fft` along
    /// every row (length `m`), then applies the unitary scale.
    fn apply_2d(&self, data: &mut [Complex64], col_fft: &Arc<dyn Fft<f64>>, row_fft: &Arc<dyn Fft<f64>>) {
        let (n, m) = (self.n, self.m);
        for row in data.chunks_exact_mut(m) {
            row_fft.process(row);
        }
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..m {
            for r in 0..n {
                column[r] = data[r * m + c];
            }
            col_fft.process(&mut column);
            for r in 0..n {
                data[r * m + c] = column[r];
            }
        }
        let scale = 1.0 / ((n * m) as f64).sqrt();
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Unitary DFT matrix `F[a, b] = e^{-j 2 pi a b / n} / sqrt(n)`.
pub fn dft_matrix(n: usize) -> CMatrix {
    let s = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |a, b| {
        let phase = -2.0 * PI * ((a * b) % n) as f64 / n as f64;
        Complex64::from_polar(s, phase)
    })
}

/// Dense modulation/demodulation operators for the vectorized frame model.
#[derive(Debug, Clone)]
pub struct KronOperators {
    /// `F_N^H (x) F_M`: vectorized ISFFT.
    pub a_mod: CMatrix,
    /// `F_N (x) F_M^H`: vectorized SFFT.
    pub a_demod: CMatrix,
    /// `I_N (x) F_M`: per-slot DFT taking time samples to subcarriers.
    pub a_tf: CMatrix,
}

/// Rejects dense builds above the oracle bound.
pub fn check_oracle_size(cells: usize) -> Result<()> {
    if cells > ORACLE_MAX_CELLS {
        return Err(Error::OracleTooLarge {
            size: cells,
            max: ORACLE_MAX_CELLS,
        });
    }
    Ok(())
}

/// Builds the dense Kronecker operators for an `N x M` frame.
pub fn build_kron_operators(m: usize, n: usize) -> Result<KronOperators> {
    check_oracle_size(m * n)?;
    let f_m = dft_matrix(m);
    let f_n = dft_matrix(n);
    let eye_n = CMatrix::identity(n, n);
    Ok(KronOperators {
        a_mod: f_n.adjoint().kronecker(&f_m),
        a_demod: f_n.kronecker(&f_m.adjoint()),
        a_tf: eye_n.kronecker(&f_m),
    })
}

/// Column vector view of a frame in its fixed vectorization order.
pub fn vectorize<D>(frame: &Frame<D>) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(frame.as_slice())
}

/// Inverse of [`vectorize`].
pub fn devectorize<D>(v: &nalgebra::DVector<Complex64>, rows: usize, cols: usize) -> Result<Frame<D>> {
    Frame::from_vec(rows, cols, v.as_slice().to_vec())
}
