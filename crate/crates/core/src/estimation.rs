//! Embedded-pilot channel estimation.
//!
//! A single pilot `x_p` sits at `(k_p, l_p)` and is surrounded by a zero guard
//! band: `|k - k_p| <= 2 k_max + 2 k_hat`, `|l - l_p| <= l_max`. The receiver
//! reads the effective channel straight off the window
//! `k in k_p +- (k_max + k_hat)`, `l in l_p..=l_p + l_max`, keeping only
//! samples above `3 sqrt(N0)`.
//!
//! Data outside the Doppler guard still leaks into the read window through
//! the window sidelobes, which sets an error floor at high SNR.

use num_complex::Complex64;

use crate::channel::{dd_filter_w, EffectiveDdChannel};
use crate::error::{Error, Result};
use crate::grid::{DdFrame, signed_doppler};
use crate::windows::WindowPair;

/// Pilot and guard placement on an `N x M` delay-Doppler frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotLayout {
    pub n: usize,
    pub m: usize,
    pub k_p: usize,
    pub l_p: usize,
    pub x_p: Complex64,
    pub k_max: usize,
    pub l_max: usize,
    pub k_hat: usize,
}

/// Largest extra Doppler guard that fits, `floor((N - 4 k_max - 1) / 4)`; negative when none fits.
pub fn max_k_hat(n: usize, k_max: usize) -> i64 {
    (n as i64 - 4 * k_max as i64 - 1).div_euclid(4)
}

/// Pilot amplitude for a power given in dBW relative to unit symbol energy.
pub fn pilot_amplitude(pilot_dbw: f64) -> f64 {
    10f64.powf(pilot_dbw / 20.0)
}

impl PilotLayout {
    /// Pilot at `k_p = floor(N/2)` with the delay band centred so it does not wrap.
    pub fn centered(n: usize, m: usize, k_max: usize, l_max: usize, k_hat: usize, pilot_dbw: f64) -> Result<Self> {
        Self::at(n, m, n / 2, m / 2, k_max, l_max, k_hat, pilot_dbw, false)
    }

    /// Pilot at an explicit position.
    ///
    /// A delay band that wraps around the frame is rejected unless
    /// `allow_delay_wrap` is set. A wrapping Doppler band is always allowed
    /// and reported by [`PilotLayout::doppler_wraps`].
    #[allow(clippy::too_many_arguments)]
    pub fn at(
        n: usize,
        m: usize,
        k_p: usize,
        l_p: usize,
        k_max: usize,
        l_max: usize,
        k_hat: usize,
        pilot_dbw: f64,
        allow_delay_wrap: bool,
    ) -> Result<Self> {
        if k_p >= n || l_p >= m {
            return Err(Error::invalid(format!("pilot ({k_p}, {l_p}) outside a {n}x{m} frame")));
        }
        let max = max_k_hat(n, k_max);
        if (k_hat as i64) > max {
            return Err(Error::InfeasibleGuard { k_hat, max });
        }
        if 2 * l_max + 1 > m {
            return Err(Error::DelayBandWrap { band: 2 * l_max + 1, m });
        }
        if !pilot_dbw.is_finite() {
            return Err(Error::invalid("pilot power must be finite"));
        }
        let layout = Self {
            n,
            m,
            k_p,
            l_p,
            x_p: Complex64::new(pilot_amplitude(pilot_dbw), 0.0),
            k_max,
            l_max,
            k_hat,
        };
        if layout.delay_wraps() && !allow_delay_wrap {
            return Err(Error::DelayBandWrap { band: 2 * l_max + 1, m });
        }
        Ok(layout)
    }

    /// Pilot power `|x_p|^2`.
    pub fn pilot_power(&self) -> f64 {
        self.x_p.norm_sqr()
    }

    /// Half-width of the Doppler guard band, `2 k_max + 2 k_hat`.
    pub fn doppler_guard(&self) -> usize {
        2 * self.k_max + 2 * self.k_hat
    }

    /// Half-width of the Doppler read window, `k_max + k_hat`.
    pub fn doppler_read(&self) -> usize {
        self.k_max + self.k_hat
    }

    /// Number of pilot plus guard cells, `(2 l_max + 1)(4 k_max + 4 k_hat + 1)`.
    pub fn overhead(&self) -> usize {
        (2 * self.l_max + 1) * (2 * self.doppler_guard() + 1)
    }

    /// True when the full Doppler axis is guarded, so no data leaks into the read window.
    pub fn is_full_guard(&self) -> bool {
        2 * self.doppler_guard() + 1 >= self.n
    }

    pub fn doppler_wraps(&self) -> bool {
        let g = self.doppler_guard();
        self.k_p < g || self.k_p + g >= self.n
    }

    pub fn delay_wraps(&self) -> bool {
        self.l_p < self.l_max || self.l_p + self.l_max >= self.m
    }

    fn doppler_distance(&self, k: usize) -> usize {
        signed_doppler((k + self.n - self.k_p) % self.n, self.n).unsigned_abs() as usize
    }

    fn delay_distance(&self, l: usize) -> usize {
        let d = (l + self.m - self.l_p) % self.m;
        d.min(self.m - d)
    }

    pub fn is_pilot(&self, k: usize, l: usize) -> bool {
        k == self.k_p && l == self.l_p
    }

    /// Zero guard cell (pilot excluded).
    pub fn is_guard(&self, k: usize, l: usize) -> bool {
        !self.is_pilot(k, l) && self.in_guard_region(k, l)
    }

    fn in_guard_region(&self, k: usize, l: usize) -> bool {
        self.doppler_distance(k) <= self.doppler_guard() && self.delay_distance(l) <= self.l_max
    }

    /// True for cells that carry data.
    pub fn is_data(&self, k: usize, l: usize) -> bool {
        !self.in_guard_region(k, l)
    }

    /// Data cells as vector indices `k M + l`, ascending.
    pub fn data_cells(&self) -> Vec<usize> {
        (0..self.n * self.m).filter(|&i| self.is_data(i / self.m, i % self.m)).collect()
    }

    /// Doppler bins outside the guard band.
    pub fn is_outside_doppler_guard(&self, k: usize) -> bool {
        self.doppler_distance(k) > self.doppler_guard()
    }

    /// Read-window offsets `(dk, dl)` relative to the pilot, `dk` signed.
    pub fn read_offsets(&self) -> Vec<(i64, usize)> {
        let r = self.doppler_read() as i64;
        let mut out = Vec::new();
        for dk in -r..=r {
            for dl in 0..=self.l_max {
                out.push((dk, dl));
            }
        }
        out
    }

    /// Absolute read-window cells `(k, l)`.
    pub fn read_window(&self) -> Vec<(usize, usize)> {
        self.read_offsets()
            .into_iter()
            .map(|(dk, dl)| {
                (
                    (self.k_p as i64 + dk).rem_euclid(self.n as i64) as usize,
                    (self.l_p + dl) % self.m,
                )
            })
            .collect()
    }
}

/// Places pilot and guard on top of a data frame.
pub fn embed_pilot(data: &DdFrame, layout: &PilotLayout) -> Result<DdFrame> {
    if data.rows() != layout.n || data.cols() != layout.m {
        return Err(Error::shape(
            format!("{}x{}", layout.n, layout.m),
            format!("{}x{}", data.rows(), data.cols()),
        ));
    }
    let mut out = data.clone();
    for k in 0..layout.n {
        for l in 0..layout.m {
            if layout.is_pilot(k, l) {
                out[(k, l)] = layout.x_p;
            } else if layout.is_guard(k, l) {
                out[(k, l)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(out)
}

/// Threshold estimator `h_hat[(k - k_p), (l - l_p)] = y[k, l] / x_p` for `|y| >= 3 sqrt(N0)`.
///
/// The estimate covers the full grid and is zero outside the read window.
pub fn estimate_channel(y: &DdFrame, layout: &PilotLayout, n0: f64) -> Result<EffectiveDdChannel> {
    if y.rows() != layout.n || y.cols() != layout.m {
        return Err(Error::shape(
            format!("{}x{}", layout.n, layout.m),
            format!("{}x{}", y.rows(), y.cols()),
        ));
    }
    if n0 < 0.0 {
        return Err(Error::NegativeInput("noise power".into()));
    }
    let threshold = 3.0 * n0.sqrt();
    let mut taps = DdFrame::zeros(layout.n, layout.m);
    for (dk, dl) in layout.read_offsets() {
        let k = (layout.k_p as i64 + dk).rem_euclid(layout.n as i64) as usize;
        let l = (layout.l_p + dl) % layout.m;
        let v = y[(k, l)];
        if v.norm() >= threshold {
            taps[(dk.rem_euclid(layout.n as i64) as usize, dl % layout.m)] = v / layout.x_p;
        }
    }
    Ok(EffectiveDdChannel { taps })
}

/// Sum of `|h_w - h_hat|^2` over the read window.
pub fn measured_ce_mse(truth: &EffectiveDdChannel, est: &EffectiveDdChannel, layout: &PilotLayout) -> f64 {
    layout
        .read_offsets()
        .into_iter()
        .map(|(dk, dl)| (truth.at(dk, dl as i64) - est.at(dk, dl as i64)).norm_sqr())
        .sum()
}

/// Number of data Doppler bins leaking into the read window, `N - 4 k_max - 4 k_hat - 1`.
pub fn leaking_bins(n: usize, k_max: usize, k_hat: usize) -> usize {
    n.saturating_sub(4 * k_max + 4 * k_hat + 1)
}

/// Sidelobe-approximated interference power, `(N - 4 k_max - 4 k_hat - 1) SL^2`.
pub fn predicted_interference_power(layout: &PilotLayout, sl: f64) -> f64 {
    leaking_bins(layout.n, layout.k_max, layout.k_hat) as f64 * sl * sl
}

/// Sidelobe-approximated estimation floor,
/// `(N - 4 k_max - 4 k_hat - 1)(2 k_max + 2 k_hat + 1)(l_max + 1) SL^2`.
///
/// This is the closed form at unit pilot power; see [`pilot_scaled_mse_floor`].
pub fn mse_floor(n: usize, k_max: usize, l_max: usize, k_hat: usize, sl: f64) -> f64 {
    (leaking_bins(n, k_max, k_hat) * (2 * k_max + 2 * k_hat + 1) * (l_max + 1)) as f64 * sl * sl
}

/// [`mse_floor`] for a layout.
pub fn predicted_mse_floor(layout: &PilotLayout, sl: f64) -> f64 {
    mse_floor(layout.n, layout.k_max, layout.l_max, layout.k_hat, sl)
}

/// Floor including the `1 / |x_p|^2` division by the pilot power.
pub fn pilot_scaled_mse_floor(layout: &PilotLayout, sl: f64) -> f64 {
    predicted_mse_floor(layout, sl) / layout.pilot_power()
}

/// Interference at `(k, l)` by direct summation over every data cell:
/// `I[k, l] = sum_{data (k', l')} x[k', l'] h_w[(k - k')_N, (l - l')_M]`.
pub fn interference_direct(h_w: &EffectiveDdChannel, frame: &DdFrame, layout: &PilotLayout, k: usize, l: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for kp in 0..layout.n {
        for lp in 0..layout.m {
            if layout.is_data(kp, lp) {
                acc += frame[(kp, lp)] * h_w.at(k as i64 - kp as i64, l as i64 - lp as i64);
            }
        }
    }
    acc
}

/// Interference restricted to the leaking Doppler bins and the `l_max + 1`
/// preceding delays, the form that is exact for a rectangular delay window.
pub fn interference_banded(h_w: &EffectiveDdChannel, frame: &DdFrame, layout: &PilotLayout, k: usize, l: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for kp in 0..layout.n {
        if !layout.is_outside_doppler_guard(kp) {
            continue;
        }
        for dl in 0..=layout.l_max {
            let lp = (l + layout.m - dl % layout.m) % layout.m;
            acc += frame[(kp, lp)] * h_w.at(k as i64 - kp as i64, dl as i64);
        }
    }
    acc
}

/// Expected interference power at Doppler bin `k` for unit-energy data and
/// independent path gains with variances `q_i` at Dopplers `nu_i`:
/// `sum_{k' outside guard} sum_i q_i |w((k - k')_N - nu_i, 0)|^2`.
pub fn interference_power_exact(layout: &PilotLayout, windows: &WindowPair, paths: &[(f64, f64)], k: usize) -> f64 {
    let mut acc = 0.0;
    for kp in 0..layout.n {
        if !layout.is_outside_doppler_guard(kp) {
            continue;
        }
        let d = ((k + layout.n - kp) % layout.n) as f64;
        for &(q, nu) in paths {
            acc += q * dd_filter_w(windows, d - nu, 0.0).norm_sqr();
        }
    }
    acc
}

/// High-SNR estimation MSE summed over the read window with the exact
/// interference power and the pilot-power division.
pub fn mse_floor_exact(layout: &PilotLayout, windows: &WindowPair, paths: &[(f64, f64)]) -> f64 {
    let per_k: f64 = layout
        .read_window()
        .iter()
        .map(|&(k, _)| interference_power_exact(layout, windows, paths, k))
        .sum();
    per_k / layout.pilot_power()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overhead_counts() {
        let l = PilotLayout::centered(20, 30, 3, 4, 1, 0.0).unwrap();
        assert_eq!(l.overhead(), 153);
        assert_eq!(l.data_cells().len(), 20 * 30 - 153);
        let l = PilotLayout::centered(8, 8, 0, 0, 0, 0.0).unwrap();
        assert_eq!(l.overhead(), 1);
        assert_eq!(l.data_cells().len(), 63);
    }

    #[test]
    fn full_guard_overhead() {
        // 4 k_max + 4 k_hat + 1 = N.
        let l = PilotLayout::centered(13, 16, 2, 3, 1, 0.0).unwrap();
        assert!(l.is_full_guard());
        assert_eq!(l.overhead(), 7 * 13);
        assert_eq!(l.data_cells().len(), 13 * 16 - 7 * 13);
    }

    #[test]
    fn infeasible_guard_rejected() {
        assert_eq!(max_k_hat(20, 3), 1);
        let err = PilotLayout::centered(20, 30, 3, 4, 2, 0.0).unwrap_err();
        assert!(matches!(err, Error::InfeasibleGuard { k_hat: 2, max: 1 }));
        assert!(PilotLayout::at(20, 30, 10, 1, 3, 4, 0, 0.0, false).is_err());
        assert!(PilotLayout::at(20, 30, 10, 1, 3, 4, 0, 0.0, true).unwrap().delay_wraps());
    }

    #[test]
    fn centred_layout_does_not_wrap() {
        for (n, m, k_max, l_max) in [(20, 30, 3, 4), (16, 8, 2, 2), (9, 5, 2, 2), (8, 3, 1, 1)] {
            let l = PilotLayout::centered(n, m, k_max, l_max, 0, 0.0).unwrap();
            assert!(!l.doppler_wraps() && !l.delay_wraps(), "{n} {m}");
        }
    }

    #[test]
    fn closed_forms() {
        let l = PilotLayout::centered(20, 30, 3, 4, 1, 0.0).unwrap();
        assert!((predicted_interference_power(&l, 1.0 / 20.0) - 0.0075).abs() < 1e-15);
        assert!((predicted_interference_power(&l, 1e-2) - 3e-4).abs() < 1e-15);
        assert!((predicted_mse_floor(&l, 1.0 / 20.0) - 0.3375).abs() < 1e-15);
        assert!((predicted_mse_floor(&l, 1e-2) - 0.0135).abs() < 1e-15);
        assert!((mse_floor(20, 3, 4, 0, 1.0 / 20.0) - 0.6125).abs() < 1e-15);
        let full = PilotLayout::centered(13, 16, 2, 3, 1, 0.0).unwrap();
        assert_eq!(predicted_interference_power(&full, 0.1), 0.0);
        let l30 = PilotLayout::centered(20, 30, 3, 4, 1, 30.0).unwrap();
        assert!((pilot_scaled_mse_floor(&l30, 1.0 / 20.0) - 0.3375e-3).abs() < 1e-12);
    }

    #[test]
    fn threshold_zeroes_small_samples() {
        let l = PilotLayout::centered(8, 8, 1, 1, 0, 0.0).unwrap();
        let y = DdFrame::filled(8, 8, Complex64::new(0.1, 0.0));
        let est = estimate_channel(&y, &l, 1.0).unwrap();
        assert_eq!(est.energy(), 0.0);
        let est = estimate_channel(&y, &l, 0.0).unwrap();
        assert_eq!(est.support(0.0), l.read_offsets().len());
    }

    #[test]
    fn mse_of_single_error() {
        let l = PilotLayout::centered(8, 8, 1, 1, 0, 0.0).unwrap();
        let truth = EffectiveDdChannel { taps: DdFrame::zeros(8, 8) };
        assert_eq!(measured_ce_mse(&truth, &truth, &l), 0.0);
        let mut est = truth.clone();
        est.taps[(7, 1)] = Complex64::new(0.3, 0.4);
        assert!((measured_ce_mse(&truth, &est, &l) - 0.25).abs() < 1e-15);
        // Outside the read window: ignored.
        est.taps[(4, 4)] = Complex64::new(5.0, 0.0);
        assert!((measured_ce_mse(&truth, &est, &l) - 0.25).abs() < 1e-15);
    }
}
