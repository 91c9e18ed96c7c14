//! Data detection: linear MMSE and sum-product message passing, plus the
//! noise model under RX windowing and error counting.

mod mmse;
mod spa;

pub use mmse::{analytic_detection_mse, error_covariance, mmse_detect, mmse_detect_tf, mmse_tf_diagonal};
pub use spa::{spa_detect, SpaConfig, SpaReport};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Constellation, DdFrame, TfFrame};
use crate::transforms::{build_kron_operators, CMatrix};

/// DD-domain noise after the RX window: `C_z = N0 A V V^H A^H` with `A` the SFFT.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    /// Noise power per TF sample before windowing.
    pub n0: f64,
    /// RX window grid `V[n, m]`.
    pub rx: TfFrame,
    /// True when `|V| = 1` everywhere, so `C_z = N0 I`.
    pub white: bool,
}

impl NoiseModel {
    /// Mean DD noise power per cell, `N0 mean |V|^2`.
    pub fn per_cell_power(&self) -> f64 {
        self.n0 * self.rx.energy() / self.rx.len() as f64
    }

    /// Dense covariance matrix (oracle scale).
    pub fn dense_covariance(&self) -> Result<CMatrix> {
        let (n, m) = (self.rx.rows(), self.rx.cols());
        if self.white {
            return Ok(CMatrix::identity(n * m, n * m) * Complex64::new(self.n0, 0.0));
        }
        let ops = build_kron_operators(m, n)?;
        let d = nalgebra::DVector::from_iterator(
            n * m,
            self.rx.as_slice().iter().map(|v| Complex64::new(self.n0 * v.norm_sqr(), 0.0)),
        );
        Ok(&ops.a_demod * CMatrix::from_diagonal(&d) * ops.a_demod.adjoint())
    }
}

/// Builds the noise model for an RX window grid.
pub fn noise_covariance(rx: &TfFrame, n0: f64) -> Result<NoiseModel> {
    if n0 < 0.0 || !n0.is_finite() {
        return Err(Error::NegativeInput(format!("noise power {n0}")));
    }
    let white = rx.as_slice().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12);
    Ok(NoiseModel {
        n0,
        rx: rx.clone(),
        white,
    })
}

/// Output of a detector over a full frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    /// Soft symbol estimates, one per cell.
    pub soft: DdFrame,
    /// Hard decisions as constellation indices, one per cell.
    pub hard: Vec<usize>,
}

impl DetectionReport {
    pub(crate) fn from_soft(soft: DdFrame, c: &Constellation) -> Self {
        let hard = soft.as_slice().iter().map(|&v| c.nearest(v)).collect();
        Self { soft, hard }
    }

    /// `||x_hat - x||^2 / |cells|` over the given cells (all cells when `None`).
    pub fn empirical_mse(&self, truth: &DdFrame, cells: Option<&[usize]>) -> f64 {
        let s = self.soft.as_slice();
        let t = truth.as_slice();
        match cells {
            Some(c) => c.iter().map(|&i| (s[i] - t[i]).norm_sqr()).sum::<f64>() / c.len() as f64,
            None => s.iter().zip(t).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / s.len() as f64,
        }
    }
}

/// Bit and frame error counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorTally {
    pub bit_errors: u64,
    pub bits: u64,
    pub symbol_errors: u64,
    pub symbols: u64,
    pub frame_errors: u64,
    pub frames: u64,
}

impl ErrorTally {
    pub fn merge(&mut self, other: &ErrorTally) {
        self.bit_errors += other.bit_errors;
        self.bits += other.bits;
        self.symbol_errors += other.symbol_errors;
        self.symbols += other.symbols;
        self.frame_errors += other.frame_errors;
        self.frames += other.frames;
    }

    pub fn ber(&self) -> f64 {
        ratio(self.bit_errors, self.bits)
    }

    pub fn fer(&self) -> f64 {
        ratio(self.frame_errors, self.frames)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Counts errors of one frame over its data cells (all cells when `None`).
pub fn count_errors(hard: &[usize], truth: &[usize], c: &Constellation, data_cells: Option<&[usize]>) -> Result<ErrorTally> {
    if hard.len() != truth.len() {
        return Err(Error::shape(truth.len(), hard.len()));
    }
    let all: Vec<usize>;
    let cells = match data_cells {
        Some(d) => d,
        None => {
            all = (0..hard.len()).collect();
            &all
        }
    };
    let mut t = ErrorTally {
        frames: 1,
        ..Default::default()
    };
    let b = c.bits_per_symbol();
    for &i in cells {
        t.symbols += 1;
        t.bits += b as u64;
        if hard[i] != truth[i] {
            t.symbol_errors += 1;
            t.bit_errors += (hard[i] ^ truth[i]).count_ones() as u64;
        }
    }
    t.frame_errors = u64::from(t.symbol_errors > 0);
    Ok(t)
}
