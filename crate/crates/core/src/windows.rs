//! TX/RX window construction: rectangular, Dolph-Chebyshev, the ideal
//! Doppler reference, and the MMSE-optimal mercury/water-filling TX window.
//!
//! Windows are stored unnormalized. Normalization is applied when a window
//! is composed into a link, against whichever constraint the analysis needs:
//! unit mean TX power, or `sum |V U|^2 = MN` for effective-channel analysis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::TfFrame;

/// One side of the link: a TF-domain weighting `W[n, m]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Window {
    /// `W[n, m] = doppler[n] * delay[m]`.
    Separable {
        /// Length-`N` weights over time slots.
        doppler: Vec<Complex64>,
        /// Length-`M` weights over subcarriers.
        delay: Vec<Complex64>,
    },
    /// Arbitrary full `N x M` grid, used by the optimal TX window.
    Grid(TfFrame),
}

impl Window {
    /// All-ones window for an `N x M` frame.
    pub fn rectangular(n: usize, m: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Window::Separable {
            doppler: vec![one; n],
            delay: vec![one; m],
        }
    }

    /// Real Doppler-axis weights with a rectangular delay axis.
    pub fn doppler_only(doppler: &[f64], m: usize) -> Self {
        Window::Separable {
            doppler: doppler.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            delay: vec![Complex64::new(1.0, 0.0); m],
        }
    }

    /// Number of time slots covered.
    pub fn n(&self) -> usize {
        match self {
            Window::Separable { doppler, .. } => doppler.len(),
            Window::Grid(g) => g.rows(),
        }
    }

    /// Number of subcarriers covered.
    pub fn m(&self) -> usize {
        match self {
            Window::Separable { delay, .. } => delay.len(),
            Window::Grid(g) => g.cols(),
        }
    }

    /// Expands to the full TF grid.
    pub fn to_grid(&self) -> TfFrame {
        match self {
            Window::Separable { doppler, delay } => {
                TfFrame::from_fn(doppler.len(), delay.len(), |n, m| doppler[n] * delay[m])
            }
            Window::Grid(g) => g.clone(),
        }
    }

    /// `sum |W|^2`.
    pub fn energy(&self) -> f64 {
        match self {
            Window::Separable { doppler, delay } => {
                let a: f64 = doppler.iter().map(|v| v.norm_sqr()).sum();
                let b: f64 = delay.iter().map(|v| v.norm_sqr()).sum();
                a * b
            }
            Window::Grid(g) => g.energy(),
        }
    }

    /// Mean power `(1/MN) sum |W|^2`.
    pub fn mean_power(&self) -> f64 {
        self.energy() / (self.n() * self.m()) as f64
    }

    /// True when every entry has unit modulus.
    pub fn is_unit_modulus(&self, tol: f64) -> bool {
        self.to_grid().as_slice().iter().all(|v| (v.norm() - 1.0).abs() <= tol)
    }

    /// Multiplies every entry by a real factor.
    pub fn scaled(&self, s: f64) -> Self {
        match self {
            Window::Separable { doppler, delay } => Window::Separable {
                doppler: doppler.iter().map(|v| v * s).collect(),
                delay: delay.clone(),
            },
            Window::Grid(g) => Window::Grid(g.map(|v| v * s)),
        }
    }

    /// Rescales to unit mean power.
    pub fn power_normalized(&self) -> Result<Self> {
        let p = self.mean_power();
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::invalid("cannot normalize an all-zero window"));
        }
        Ok(self.scaled(1.0 / p.sqrt()))
    }
}

/// TX window `U` and RX window `V` for one link.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowPair {
    pub tx: Window,
    pub rx: Window,
}

impl WindowPair {
    pub fn new(tx: Window, rx: Window) -> Result<Self> {
        if tx.n() != rx.n() || tx.m() != rx.m() {
            return Err(Error::shape(
                format!("{}x{}", tx.n(), tx.m()),
                format!("{}x{}", rx.n(), rx.m()),
            ));
        }
        Ok(Self { tx, rx })
    }

    /// Rectangular windows on both sides.
    pub fn rectangular(n: usize, m: usize) -> Self {
        Self {
            tx: Window::rectangular(n, m),
            rx: Window::rectangular(n, m),
        }
    }

    pub fn n(&self) -> usize {
        self.tx.n()
    }

    pub fn m(&self) -> usize {
        self.tx.m()
    }

    /// Joint window `V[n, m] U[n, m]`.
    pub fn joint(&self) -> TfFrame {
        match (&self.tx, &self.rx) {
            (
                Window::Separable { doppler: ud, delay: ut },
                Window::Separable { doppler: vd, delay: vt },
            ) => TfFrame::from_fn(ud.len(), ut.len(), |n, m| ud[n] * vd[n] * ut[m] * vt[m]),
            _ => self
                .tx
                .to_grid()
                .hadamard(&self.rx.to_grid())
                .expect("window pair shapes checked at construction"),
        }
    }

    /// Separable joint factors `(V_nu U_nu, V_tau U_tau)` when both sides are separable.
    pub fn joint_factors(&self) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
        match (&self.tx, &self.rx) {
            (
                Window::Separable { doppler: ud, delay: ut },
                Window::Separable { doppler: vd, delay: vt },
            ) => Some((
                ud.iter().zip(vd).map(|(a, b)| a * b).collect(),
                ut.iter().zip(vt).map(|(a, b)| a * b).collect(),
            )),
            _ => None,
        }
    }

    /// `sum |V U|^2`.
    pub fn joint_energy(&self) -> f64 {
        self.joint().energy()
    }

    /// Scales the TX side so that `sum |V U|^2 = MN`.
    pub fn jointly_normalized(&self) -> Result<Self> {
        let e = self.joint_energy();
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::invalid("joint window has zero energy"));
        }
        let target = (self.n() * self.m()) as f64;
        Ok(Self {
            tx: self.tx.scaled((target / e).sqrt()),
            rx: self.rx.clone(),
        })
    }

    /// Scales each side independently to unit mean power.
    pub fn power_normalized(&self) -> Result<Self> {
        Ok(Self {
            tx: self.tx.power_normalized()?,
            rx: self.rx.power_normalized()?,
        })
    }

    /// Checks `sum |V U|^2 = MN` to a relative tolerance.
    pub fn check_joint_normalized(&self, rel_tol: f64) -> Result<()> {
        let power = self.joint_energy();
        let expected = (self.n() * self.m()) as f64;
        if ((power - expected) / expected).abs() > rel_tol {
            return Err(Error::UnnormalizedWindow { power, expected });
        }
        Ok(())
    }
}

/// All-ones coefficient vector.
pub fn rectangular(len: usize) -> Result<Vec<f64>> {
    if len < 1 {
        return Err(Error::invalid("window length must be at least 1"));
    }
    Ok(vec![1.0; len])
}

/// Normalized Doppler-domain response `(1/N) sum_n c[n] e^{-j 2 pi n dk / N}`.
///
/// This is the Doppler factor of the DD filter for a window whose other
/// factors are all ones; the rectangular window gives 1 at `dk = 0`.
pub fn doppler_response(coeffs: &[f64], dk: f64) -> Complex64 {
    let n = coeffs.len() as f64;
    coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| Complex64::from_polar(c, -2.0 * PI * i as f64 * dk / n))
        .sum::<Complex64>()
        / n
}

/// Ideal Doppler-domain response: 1 on `[-0.5, 0.5]`, 0 elsewhere.
///
/// Only a comparison curve; it needs an infinitely long window.
pub fn ideal_window_reference(dk: f64) -> f64 {
    if (-0.5..=0.5).contains(&dk) {
        1.0
    } else {
        0.0
    }
}

/// A Dolph-Chebyshev design together with its measured response.
#[derive(Debug, Clone, PartialEq)]
pub struct DcWindow {
    /// Coefficients, peak-normalized to 1.
    pub coeffs: Vec<f64>,
    /// Requested sidelobe level in dB.
    pub target_sidelobe_db: f64,
    /// Highest sidelobe of the measured Doppler response, dB relative to the peak.
    pub measured_sidelobe_db: f64,
    /// Null-to-null mainlobe width in Doppler bins.
    pub k_main: f64,
    /// Closed-form sidelobe level predicted from `k_main`, informational only.
    pub formula_sidelobe_db: f64,
}

/// Sidelobe target tolerance accepted by [`dc_window`], dB.
pub const DC_SIDELOBE_TOLERANCE_DB: f64 = 0.5;

/// Designs a length-`n` Dolph-Chebyshev window with sidelobes at `sl_db`.
///
/// The frequency response `T_{N-1}(x0 cos(theta/2))`, with
/// `x0 = cosh(acosh(10^{-SL/20}) / (N-1))`, is sampled at `N` equispaced
/// frequencies and inverse-transformed to real coefficients.
pub fn dc_window(n: usize, sl_db: f64) -> Result<DcWindow> {
    if n < 3 {
        return Err(Error::invalid(format!("Dolph-Chebyshev window needs N >= 3, got {n}")));
    }
    if !sl_db.is_finite() || sl_db > -10.0 {
        return Err(Error::invalid(format!("sidelobe level must be <= -10 dB, got {sl_db}")));
    }
    let coeffs = chebyshev_coefficients(n, -sl_db);
    let (k_main, measured) = measure_response(&coeffs);
    if measured.is_nan() || measured > sl_db + DC_SIDELOBE_TOLERANCE_DB {
        return Err(Error::InfeasibleSidelobe {
            requested_db: sl_db,
            achievable_db: measured,
        });
    }
    Ok(DcWindow {
        coeffs,
        target_sidelobe_db: sl_db,
        measured_sidelobe_db: measured,
        k_main,
        formula_sidelobe_db: sidelobe_formula_db(n, k_main),
    })
}

/// Closed-form lowest sidelobe level for a mainlobe of `k_main` bins.
///
/// `SL = -20 log10 cosh((N/2) acosh((3 - cos a) / (1 + cos a)))` with the
/// half-width `a = pi k_main / N` in radians.
pub fn sidelobe_formula_db(n: usize, k_main: f64) -> f64 {
    let c = (PI * k_main / n as f64).cos();
    let arg = (3.0 - c) / (1.0 + c);
    -20.0 * ((n as f64 / 2.0) * arg.acosh()).cosh().log10()
}

fn chebyshev_coefficients(n: usize, atten_db: f64) -> Vec<f64> {
    let order = (n - 1) as f64;
    let beta = ((10f64.powf(atten_db / 20.0)).acosh() / order).cosh();
    let p: Vec<f64> = (0..n)
        .map(|k| {
            let x = beta * (PI * k as f64 / n as f64).cos();
            if x > 1.0 {
                (order * x.acosh()).cosh()
            } else if x < -1.0 {
                let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
                sign * (order * (-x).acosh()).cosh()
            } else {
                (order * x.acos()).cos()
            }
        })
        .collect();

    let mut buf: Vec<Complex64> = if n % 2 == 1 {
        p.iter().map(|&v| Complex64::new(v, 0.0)).collect()
    } else {
        p.iter()
            .enumerate()
            .map(|(k, &v)| Complex64::from_polar(v, PI * k as f64 / n as f64))
            .collect()
    };
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let w: Vec<f64> = buf.iter().map(|c| c.re).collect();

    let mut out = Vec::with_capacity(n);
    if n % 2 == 1 {
        let half = n.div_ceil(2);
        out.extend((1..half).rev().map(|i| w[i]));
        out.extend(w[..half].iter().copied());
    } else {
        let half = n / 2 + 1;
        out.extend((1..half).rev().map(|i| w[i]));
        out.extend(w[1..half].iter().copied());
    }
    let peak = out.iter().copied().fold(f64::MIN, f64::max);
    out.iter().map(|v| v / peak).collect()
}

/// Measures `(null-to-null width in bins, peak sidelobe in dB)` of a real window's Doppler response.
pub fn measure_response(coeffs: &[f64]) -> (f64, f64) {
    let n = coeffs.len() as f64;
    let mag = |dk: f64| doppler_response(coeffs, dk).norm();
    let peak = mag(0.0);
    let step = 1.0 / 256.0;
    let steps = (n / 2.0 / step).round() as usize;

    // First local minimum walking out from the peak.
    let mut null_idx = steps;
    let mut prev = peak;
    for i in 1..=steps {
        let v = mag(i as f64 * step);
        if v > prev {
            null_idx = i - 1;
            break;
        }
        prev = v;
    }
    let null = golden_min(&mag, ((null_idx as f64) - 1.0).max(0.0) * step, (null_idx as f64 + 1.0) * step);

    let mut side = 0.0f64;
    for i in 0..=steps {
        let dk = i as f64 * step;
        if dk > null {
            side = side.max(mag(dk));
        }
    }
    // Refine around the discrete maximum.
    let best = (0..=steps)
        .map(|i| i as f64 * step)
        .filter(|&dk| dk > null)
        .max_by(|a, b| mag(*a).total_cmp(&mag(*b)));
    if let Some(dk) = best {
        let lo = (dk - step).max(null);
        let hi = (dk + step).min(n / 2.0);
        let refined = golden_min(&|x| -mag(x), lo, hi);
        side = side.max(mag(refined));
    }
    let sl_db = if side > 0.0 { 20.0 * (side / peak).log10() } else { f64::NEG_INFINITY };
    (2.0 * null, sl_db)
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

/// Solution of the mean-MSE-minimizing TX power allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    /// Per-cell powers `x = |U|^2`, same order as the input gains.
    pub x: Vec<f64>,
    /// Dual variable of the power budget.
    pub eta: f64,
    /// Mercury level per cell.
    pub mercury: Vec<f64>,
    /// `|(1/MN) sum x - 1|`.
    pub budget_residual: f64,
    /// Largest relative KKT stationarity violation.
    pub kkt_residual: f64,
}

impl PowerAllocation {
    /// Real TX window `U = sqrt(x)` laid out as an `n x m` grid.
    pub fn window(&self, n: usize, m: usize) -> Result<Window> {
        let values = self.x.iter().map(|&x| Complex64::new(x.sqrt(), 0.0)).collect();
        Ok(Window::Grid(TfFrame::from_vec(n, m, values)?))
    }
}

fn allocation(lambda: &[f64], eta: f64) -> impl Iterator<Item = f64> + '_ {
    lambda.iter().map(move |&l| {
        if l > 0.0 {
            (1.0 / (eta * l).sqrt() - 1.0 / l).max(0.0)
        } else {
            0.0
        }
    })
}

fn mean_allocation(lambda: &[f64], eta: f64) -> f64 {
    allocation(lambda, eta).sum::<f64>() / lambda.len() as f64
}

/// MMSE-optimal TX power allocation over eigen-channel gains `lambda`.
///
/// Solves `min (1/MN) sum 1/(lambda x + 1)` subject to `x >= 0` and
/// `(1/MN) sum x = 1`. The solution is
/// `x = [1/sqrt(eta lambda) - 1/lambda]^+`; `eta` is bracketed in
/// `(0, max lambda]` and found by bisection, then polished with the exact
/// closed form on the active set.
pub fn optimal_tx_window(lambda: &[f64]) -> Result<PowerAllocation> {
    if lambda.is_empty() {
        return Err(Error::invalid("empty gain vector"));
    }
    if let Some(v) = lambda.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite channel gain {v}")));
    }
    if lambda.iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeInput("channel gains must be non-negative".into()));
    }
    let lmax = lambda.iter().copied().fold(0.0, f64::max);
    if lmax <= 0.0 {
        return Err(Error::NoUsableChannel);
    }
    let mn = lambda.len() as f64;

    // mean_allocation is decreasing in eta and zero at eta = max lambda.
    let hi_start = lmax;
    let mut lo = lmax;
    while mean_allocation(lambda, lo) < 1.0 {
        lo *= 0.5;
    }
    let mut hi = hi_start;
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mean_allocation(lambda, mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    let mut eta = 0.5 * (lo + hi);

    // Closed-form polish: 1/sqrt(eta) = (MN + sum_A 1/lambda) / sum_A lambda^{-1/2}.
    let active: Vec<f64> = lambda.iter().copied().filter(|&l| l > eta).collect();
    if !active.is_empty() {
        let num = mn + active.iter().map(|l| 1.0 / l).sum::<f64>();
        let den: f64 = active.iter().map(|l| 1.0 / l.sqrt()).sum();
        let polished = (den / num).powi(2);
        let same_set = lambda.iter().all(|&l| (l > polished) == (l > eta));
        let better = (mean_allocation(lambda, polished) - 1.0).abs() <= (mean_allocation(lambda, eta) - 1.0).abs();
        if same_set && better {
            eta = polished;
        }
    }

    let x: Vec<f64> = allocation(lambda, eta).collect();
    let inv_sqrt_eta = 1.0 / eta.sqrt();
    let mercury = lambda
        .iter()
        .map(|&l| {
            if l > 0.0 {
                inv_sqrt_eta * (inv_sqrt_eta - 1.0 / l.sqrt()).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    let budget_residual = (x.iter().sum::<f64>() / mn - 1.0).abs();
    let kkt_residual = kkt_residual(lambda, &x, eta);
    Ok(PowerAllocation {
        x,
        eta,
        mercury,
        budget_residual,
        kkt_residual,
    })
}

/// Largest relative KKT violation: `lambda / (lambda x + 1)^2 = eta` on active
/// cells and `lambda <= eta` on inactive ones.
pub fn kkt_residual(lambda: &[f64], x: &[f64], eta: f64) -> f64 {
    lambda
        .iter()
        .zip(x)
        .map(|(&l, &xi)| {
            if xi > 0.0 {
                ((l / (l * xi + 1.0).powi(2) - eta) / eta).abs()
            } else {
                ((l - eta) / eta).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Entrywise product of a TF frame with a window grid.
pub fn apply_window(frame: &TfFrame, window: &TfFrame) -> Result<TfFrame> {
    frame.hadamard(window)
}
