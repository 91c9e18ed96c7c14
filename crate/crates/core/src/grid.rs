//! Frame geometry, delay-Doppler / time-frequency symbol grids and constellations.
//!
//! Index conventions used everywhere in the crate:
//!
//! - A delay-Doppler frame is indexed `(k, l)` with Doppler bin `k in 0..N` and
//!   delay bin `l in 0..M`; entry `(k, l)` sits at vector index `k * M + l`.
//! - A time-frequency frame is indexed `(n, m)` with time slot `n in 0..N` and
//!   subcarrier `m in 0..M`; entry `(n, m)` sits at vector index `n * M + m`.
//! - Negative Doppler indices are stored modulo `N`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// OTFS frame geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameGrid {
    /// Number of delay bins (subcarriers).
    pub m: usize,
    /// Number of Doppler bins (time slots).
    pub n: usize,
    /// Subcarrier spacing in Hz.
    pub delta_f: f64,
    /// Carrier frequency in Hz.
    pub fc: f64,
}

/// Delay, Doppler and relative-speed resolutions of a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolutions {
    /// Delay resolution in seconds, `1 / (M delta_f)`.
    pub delay: f64,
    /// Doppler resolution in Hz, `delta_f / N`.
    pub doppler: f64,
    /// Relative speed resolution in m/s.
    pub speed: f64,
}

impl FrameGrid {
    pub fn new(m: usize, n: usize, delta_f: f64, fc: f64) -> Result<Self> {
        if m < 2 || n < 2 {
            return Err(Error::invalid(format!("grid needs M >= 2 and N >= 2, got M={m}, N={n}")));
        }
        if !(delta_f > 0.0 && delta_f.is_finite()) || !(fc > 0.0 && fc.is_finite()) {
            return Err(Error::invalid("subcarrier spacing and carrier frequency must be positive"));
        }
        Ok(Self { m, n, delta_f, fc })
    }

    /// Number of cells `M * N`.
    pub fn len(&self) -> usize {
        self.m * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Slot duration `T = 1 / delta_f`.
    pub fn slot_duration(&self) -> f64 {
        1.0 / self.delta_f
    }

    /// Occupied bandwidth `M delta_f`.
    pub fn bandwidth(&self) -> f64 {
        self.m as f64 * self.delta_f
    }

    /// Frame duration `N T`.
    pub fn frame_duration(&self) -> f64 {
        self.n as f64 * self.slot_duration()
    }

    pub fn resolutions(&self) -> Resolutions {
        let doppler = self.delta_f / self.n as f64;
        Resolutions {
            delay: 1.0 / (self.m as f64 * self.delta_f),
            doppler,
            speed: doppler * SPEED_OF_LIGHT / self.fc,
        }
    }

    /// Maximum relative speed (m/s) resolvable with Doppler indices up to `k_max`.
    pub fn max_speed(&self, k_max: usize) -> f64 {
        k_max as f64 * self.resolutions().speed
    }
}

/// Maps a signed Doppler index onto `0..n`.
pub fn doppler_bin(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Maps a stored Doppler bin back to the signed range `[-n/2, n/2)`.
pub fn signed_doppler(k: usize, n: usize) -> i64 {
    let k = (k % n) as i64;
    let n = n as i64;
    if k >= n - n / 2 {
        k - n
    } else {
        k
    }
}

/// Marker for the delay-Doppler domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayDoppler;

/// Marker for the time-frequency domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeFrequency;

/// A complex `N x M` grid in one of the two domains.
///
/// Rows are Doppler bins (DD) or time slots (TF); columns are delay bins (DD)
/// or subcarriers (TF). Storage is row-major, which is exactly the
/// vectorization order `row * M + col`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<D> {
    rows: usize,
    cols: usize,
    values: Vec<Complex64>,
    _domain: PhantomData<D>,
}

/// Delay-Doppler frame, indexed `(k, l)`.
pub type DdFrame = Frame<DelayDoppler>;
/// Time-frequency frame, indexed `(n, m)`.
pub type TfFrame = Frame<TimeFrequency>;

impl<D> Frame<D> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, Complex64::new(0.0, 0.0))
    }

    pub fn filled(rows: usize, cols: usize, value: Complex64) -> Self {
        Self {
            rows,
            cols,
            values: vec![value; rows * cols],
            _domain: PhantomData,
        }
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::shape(rows * cols, values.len()));
        }
        Ok(Self {
            rows,
            cols,
            values,
            _domain: PhantomData,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        Self {
            rows,
            cols,
            values,
            _domain: PhantomData,
        }
    }

    /// Number of rows (`N`).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns (`M`).
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Vector index of `(row, col)`.
    pub fn index_of(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// `(row, col)` of a vector index.
    pub fn position(&self, index: usize) -> (usize, usize) {
        (index / self.cols, index % self.cols)
    }

    /// Entry at circularly reduced indices.
    pub fn get_wrapped(&self, row: i64, col: i64) -> Complex64 {
        let r = row.rem_euclid(self.rows as i64) as usize;
        let c = col.rem_euclid(self.cols as i64) as usize;
        self.values[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.values
    }

    pub fn same_shape<E>(&self, other: &Frame<E>) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }

    /// Squared Euclidean norm.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Entrywise product with a frame of the same shape.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::shape(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            values,
            _domain: PhantomData,
        })
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|&v| f(v)).collect(),
            _domain: PhantomData,
        }
    }

    /// Largest entrywise distance to another frame.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl<D> Index<(usize, usize)> for Frame<D> {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        assert!(r < self.rows && c < self.cols, "frame index ({r}, {c}) out of bounds");
        &self.values[r * self.cols + c]
    }
}

impl<D> IndexMut<(usize, usize)> for Frame<D> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        assert!(r < self.rows && c < self.cols, "frame index ({r}, {c}) out of bounds");
        &mut self.values[r * self.cols + c]
    }
}

/// Supported constellations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qpsk,
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulation::Bpsk => write!(f, "bpsk"),
            Modulation::Qpsk => write!(f, "qpsk"),
        }
    }
}

/// Unit-energy constellation with a fixed bit labelling.
///
/// BPSK maps bit 0 to `+1` and bit 1 to `-1`. QPSK is Gray mapped with the
/// first bit on the in-phase rail and the second on the quadrature rail, so
/// `00 -> (1 + j) / sqrt(2)`. Point index `q` carries bits `q`'s binary
/// expansion, most significant bit first.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    modulation: Modulation,
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        let points = match modulation {
            Modulation::Bpsk => vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            Modulation::Qpsk => {
                let a = FRAC_1_SQRT_2;
                vec![
                    Complex64::new(a, a),
                    Complex64::new(a, -a),
                    Complex64::new(-a, a),
                    Complex64::new(-a, -a),
                ]
            }
        };
        Self { modulation, points }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Alphabet size `Q`.
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.size().trailing_zeros() as usize
    }

    /// Mean symbol energy, `1` for every supported constellation.
    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.size() as f64
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Index of the point carrying `bits` (MSB first).
    pub fn index_of_bits(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b & 1))
    }

    /// Bits carried by point `index` (MSB first).
    pub fn bits_of_index(&self, index: usize) -> Vec<u8> {
        let b = self.bits_per_symbol();
        (0..b).map(|i| ((index >> (b - 1 - i)) & 1) as u8).collect()
    }

    /// Index of the nearest constellation point.
    pub fn nearest(&self, value: Complex64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (value - p).norm_sqr();
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        best
    }

    /// Maps a bit sequence onto symbol indices.
    pub fn bits_to_indices(&self, bits: &[u8]) -> Result<Vec<usize>> {
        let b = self.bits_per_symbol();
        if !bits.len().is_multiple_of(b) {
            return Err(Error::BitCountMismatch {
                expected: bits.len().div_ceil(b) * b,
                got: bits.len(),
            });
        }
        Ok(bits.chunks(b).map(|c| self.index_of_bits(c)).collect())
    }

    pub fn indices_to_bits(&self, indices: &[usize]) -> Vec<u8> {
        indices.iter().flat_map(|&q| self.bits_of_index(q)).collect()
    }
}

/// Maps bits onto a delay-Doppler frame.
///
/// When `data_cells` is given, symbols fill only those vector positions (in
/// the given order) and every other cell is zero; otherwise all `N * M` cells
/// carry data.
pub fn map_symbols(
    bits: &[u8],
    constellation: &Constellation,
    n: usize,
    m: usize,
    data_cells: Option<&[usize]>,
) -> Result<DdFrame> {
    let cells: Vec<usize> = match data_cells {
        Some(c) => c.to_vec(),
        None => (0..n * m).collect(),
    };
    let expected = cells.len() * constellation.bits_per_symbol();
    if bits.len() != expected {
        return Err(Error::BitCountMismatch {
            expected,
            got: bits.len(),
        });
    }
    let indices = constellation.bits_to_indices(bits)?;
    let mut frame = DdFrame::zeros(n, m);
    for (&cell, &q) in cells.iter().zip(&indices) {
        if cell >= n * m {
            return Err(Error::invalid(format!("data cell {cell} outside a {n}x{m} frame")));
        }
        frame.as_mut_slice()[cell] = constellation.point(q);
    }
    Ok(frame)
}

/// Hard-demaps the data cells of a frame back to bits.
pub fn demap_symbols(frame: &DdFrame, constellation: &Constellation, data_cells: Option<&[usize]>) -> Vec<u8> {
    let values = frame.as_slice();
    let indices: Vec<usize> = match data_cells {
        Some(cells) => cells.iter().map(|&c| constellation.nearest(values[c])).collect(),
        None => values.iter().map(|&v| constellation.nearest(v)).collect(),
    };
    constellation.indices_to_bits(&indices)
}
