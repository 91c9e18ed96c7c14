//! Doubly-dispersive delay-Doppler channels under ideal pulses.
//!
//! A path `i` has gain `h_i`, integer delay `l_i` and Doppler
//! `nu_i = k_i + kappa_i` (in bins, `|kappa_i| < 1/2`). With ideal pulses the
//! time-frequency channel is diagonal:
//!
//! ```text
//! H[n, m] = sum_i h_i e^{-j 2 pi nu_i l_i / NM} e^{j 2 pi (n nu_i / N - m l_i / M)}
//! ```
//!
//! and the windowed end-to-end DD channel is a 2D circular convolution with
//! the effective channel `h_w = sfft(V U H) / sqrt(NM)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{doppler_bin, DdFrame, FrameGrid, TfFrame};
use crate::transforms::{build_kron_operators, check_oracle_size, dft_matrix, CMatrix, TransformPlan};
use crate::windows::WindowPair;

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSpec {
    /// Complex gain.
    pub h: Complex64,
    /// Integer delay index.
    pub l_tau: usize,
    /// Integer Doppler index, signed.
    pub k_nu: i64,
    /// Fractional Doppler in `(-1/2, 1/2)`.
    pub kappa: f64,
}

impl PathSpec {
    pub fn new(h: Complex64, l_tau: usize, k_nu: i64, kappa: f64) -> Result<Self> {
        if kappa.is_nan() || kappa.abs() >= 0.5 {
            return Err(Error::invalid(format!("fractional Doppler must lie in (-1/2, 1/2), got {kappa}")));
        }
        Ok(Self { h, l_tau, k_nu, kappa })
    }

    /// Total Doppler shift in bins.
    pub fn doppler(&self) -> f64 {
        self.k_nu as f64 + self.kappa
    }

    /// Phase factor `e^{-j 2 pi nu l / NM}`.
    pub fn phase(&self, n: usize, m: usize) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * PI * self.doppler() * self.l_tau as f64 / (n * m) as f64)
    }
}

/// A set of paths over a given frame geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub grid: FrameGrid,
    pub paths: Vec<PathSpec>,
}

/// Variances of the normalized exponential power delay profile for the given delays.
pub fn path_variances(delays: &[usize]) -> Vec<f64> {
    let raw: Vec<f64> = delays.iter().map(|&l| (-0.1 * l as f64).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

impl ChannelRealization {
    pub fn new(grid: FrameGrid, paths: Vec<PathSpec>) -> Self {
        Self { grid, paths }
    }

    /// Single path with unit gain.
    pub fn single(grid: FrameGrid, l_tau: usize, k_nu: i64, kappa: f64) -> Result<Self> {
        Ok(Self::new(grid, vec![PathSpec::new(Complex64::new(1.0, 0.0), l_tau, k_nu, kappa)?]))
    }

    /// Expected path powers `q_i` under the sampling profile.
    pub fn path_variances(&self) -> Vec<f64> {
        path_variances(&self.paths.iter().map(|p| p.l_tau).collect::<Vec<_>>())
    }

    /// `sum |h_i|^2`.
    pub fn gain_energy(&self) -> f64 {
        self.paths.iter().map(|p| p.h.norm_sqr()).sum()
    }

    /// True when every path has zero fractional Doppler.
    pub fn is_integer_doppler(&self) -> bool {
        self.paths.iter().all(|p| p.kappa == 0.0)
    }

    /// Line-oriented text record, one `h_re h_im l_tau k_nu kappa` line per path.
    pub fn to_record(&self) -> String {
        let mut s = String::new();
        for p in &self.paths {
            s.push_str(&format!("{} {} {} {} {}\n", p.h.re, p.h.im, p.l_tau, p.k_nu, p.kappa));
        }
        s
    }

    /// Parses a record written by [`ChannelRealization::to_record`].
    pub fn from_record(grid: FrameGrid, text: &str) -> Result<Self> {
        let mut paths = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 {
                return Err(Error::invalid(format!("record line {}: expected 5 fields, got {}", ln + 1, f.len())));
            }
            let bad = |what: &str| Error::invalid(format!("record line {}: bad {what}", ln + 1));
            let re: f64 = f[0].parse().map_err(|_| bad("h_re"))?;
            let im: f64 = f[1].parse().map_err(|_| bad("h_im"))?;
            let l_tau: usize = f[2].parse().map_err(|_| bad("l_tau"))?;
            let k_nu: i64 = f[3].parse().map_err(|_| bad("k_nu"))?;
            let kappa: f64 = f[4].parse().map_err(|_| bad("kappa"))?;
            paths.push(PathSpec::new(Complex64::new(re, im), l_tau, k_nu, kappa)?);
        }
        Ok(Self::new(grid, paths))
    }
}

/// Parameters of the random channel profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelProfile {
    /// Number of paths `P`.
    pub paths: usize,
    pub k_max: usize,
    pub l_max: usize,
    /// Draw fractional Doppler; integer-only when false.
    pub fractional: bool,
}

impl ChannelProfile {
    pub fn validate(&self, grid: &FrameGrid) -> Result<()> {
        if self.paths < 1 {
            return Err(Error::invalid("need at least one path"));
        }
        if self.k_max > (grid.n - 1) / 2 {
            return Err(Error::invalid(format!(
                "k_max = {} exceeds floor((N-1)/2) = {}",
                self.k_max,
                (grid.n - 1) / 2
            )));
        }
        if self.l_max > grid.m - 1 {
            return Err(Error::invalid(format!("l_max = {} exceeds M-1 = {}", self.l_max, grid.m - 1)));
        }
        Ok(())
    }
}

/// Draws a random channel.
///
/// Delays are uniform on `0..=l_max` with replacement, integer Doppler
/// uniform on `-k_max..=k_max`, fractional Doppler uniform on `(-1/2, 1/2)`,
/// and `h_i ~ CN(0, q_i)` with the normalized exponential delay profile.
pub fn sample_channel<R: Rng + ?Sized>(grid: &FrameGrid, profile: &ChannelProfile, rng: &mut R) -> Result<ChannelRealization> {
    profile.validate(grid)?;
    let mut delays = Vec::with_capacity(profile.paths);
    let mut dopplers = Vec::with_capacity(profile.paths);
    let k = profile.k_max as i64;
    for _ in 0..profile.paths {
        delays.push(rng.random_range(0..=profile.l_max));
        let k_nu = rng.random_range(-k..=k);
        let kappa = if profile.fractional {
            loop {
                let v: f64 = rng.random_range(-0.5..0.5);
                if v > -0.5 {
                    break v;
                }
            }
        } else {
            0.0
        };
        dopplers.push((k_nu, kappa));
    }
    let q = path_variances(&delays);
    let paths = delays
        .iter()
        .zip(&dopplers)
        .zip(&q)
        .map(|((&l_tau, &(k_nu, kappa)), &qi)| {
            let s = (qi / 2.0).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            PathSpec {
                h: Complex64::new(re * s, im * s),
                l_tau,
                k_nu,
                kappa,
            }
        })
        .collect();
    Ok(ChannelRealization::new(*grid, paths))
}

/// Diagonal TF channel `H[n, m]`, stored at `n M + m`.
pub fn tf_channel(ch: &ChannelRealization) -> TfFrame {
    let (n, m) = (ch.grid.n, ch.grid.m);
    let mut out = TfFrame::zeros(n, m);
    let mut time = vec![Complex64::new(0.0, 0.0); n];
    let mut freq = vec![Complex64::new(0.0, 0.0); m];
    for p in &ch.paths {
        let g = p.h * p.phase(n, m);
        let nu = p.doppler();
        for (i, t) in time.iter_mut().enumerate() {
            *t = Complex64::from_polar(1.0, 2.0 * PI * i as f64 * nu / n as f64);
        }
        for (j, f) in freq.iter_mut().enumerate() {
            *f = Complex64::from_polar(1.0, -2.0 * PI * ((j * p.l_tau) % m) as f64 / m as f64);
        }
        for (i, row) in out.as_mut_slice().chunks_exact_mut(m).enumerate() {
            let a = g * time[i];
            for (v, f) in row.iter_mut().zip(&freq) {
                *v += a * f;
            }
        }
    }
    out
}

/// Dense time-domain channel `(I_N (x) F_M^H) diag(H) (I_N (x) F_M)`.
pub fn time_channel(h_tf: &TfFrame) -> Result<CMatrix> {
    let (n, m) = (h_tf.rows(), h_tf.cols());
    check_oracle_size(n * m)?;
    let f = CMatrix::identity(n, n).kronecker(&dft_matrix(m));
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(h_tf.as_slice()));
    Ok(f.adjoint() * d * f)
}

/// DD filter `w(dk, dl) = (1/NM) sum_n sum_m V U e^{-j 2 pi n dk / N} e^{j 2 pi m dl / M}`.
///
/// `w` is exactly `N`-periodic in `dk` and `M`-periodic in `dl`; `dk` is still
/// reduced into `[-N/2, N/2)` first to keep the phase arguments small.
pub fn dd_filter_w(windows: &WindowPair, dk: f64, dl: f64) -> Complex64 {
    let (n, m) = (windows.n(), windows.m());
    let dk = reduce_offset(dk, n);
    let dl = reduce_offset(dl, m);
    if let Some((dopp, delay)) = windows.joint_factors() {
        let a: Complex64 = dopp
            .iter()
            .enumerate()
            .map(|(i, v)| v * Complex64::from_polar(1.0, -2.0 * PI * i as f64 * dk / n as f64))
            .sum();
        let b: Complex64 = delay
            .iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::from_polar(1.0, 2.0 * PI * j as f64 * dl / m as f64))
            .sum();
        return a * b / (n * m) as f64;
    }
    let g = windows.joint();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..m {
            let ph = -2.0 * PI * i as f64 * dk / n as f64 + 2.0 * PI * j as f64 * dl / m as f64;
            acc += g[(i, j)] * Complex64::from_polar(1.0, ph);
        }
    }
    acc / (n * m) as f64
}

/// Reduces a real offset into `[-p/2, p/2)`.
pub fn reduce_offset(d: f64, p: usize) -> f64 {
    let p = p as f64;
    (d + p / 2.0).rem_euclid(p) - p / 2.0
}

/// Rectangular-window DD filter in closed form (Dirichlet kernels).
pub fn rect_filter_closed_form(n: usize, m: usize, dk: f64, dl: f64) -> Complex64 {
    dirichlet(n, -dk) * dirichlet(m, dl)
}

/// `(1/P) sum_{i<P} e^{j 2 pi i d / P}` in closed form.
fn dirichlet(p: usize, d: f64) -> Complex64 {
    let pf = p as f64;
    let s = (PI * d / pf).sin();
    if s.abs() < 1e-12 {
        // Integer multiple of P.
        let r = (d / pf).round();
        return Complex64::from_polar(1.0, PI * r * (pf - 1.0));
    }
    Complex64::from_polar((PI * d).sin() / (pf * s), PI * d * (pf - 1.0) / pf)
}

/// One tap of an effective channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Doppler offset, modular in `0..N`.
    pub k: usize,
    /// Delay offset, modular in `0..M`.
    pub l: usize,
    pub value: Complex64,
}

/// Sparse `L`-tap approximation of an effective channel.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedChannel {
    pub n: usize,
    pub m: usize,
    pub taps: Vec<Tap>,
    /// Energy of all discarded taps.
    pub residual_energy: f64,
}

/// Windowed DD-domain channel `h_w[k, l]` on the full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveDdChannel {
    pub taps: DdFrame,
}

impl EffectiveDdChannel {
    pub fn n(&self) -> usize {
        self.taps.rows()
    }

    pub fn m(&self) -> usize {
        self.taps.cols()
    }

    /// Tap at circularly reduced offsets.
    pub fn at(&self, k: i64, l: i64) -> Complex64 {
        self.taps.get_wrapped(k, l)
    }

    pub fn energy(&self) -> f64 {
        self.taps.energy()
    }

    /// The `count` largest-magnitude taps, ties broken by smaller `(k, l)`.
    pub fn largest_taps(&self, count: usize) -> Vec<Tap> {
        let m = self.m();
        let mut idx: Vec<usize> = (0..self.taps.len()).collect();
        let v = self.taps.as_slice();
        idx.sort_by(|&a, &b| v[b].norm_sqr().total_cmp(&v[a].norm_sqr()).then(a.cmp(&b)));
        idx.into_iter()
            .take(count)
            .map(|i| Tap {
                k: i / m,
                l: i % m,
                value: v[i],
            })
            .collect()
    }

    /// Keeps the `l` largest taps and records the discarded energy.
    pub fn truncate(&self, l: usize) -> Result<TruncatedChannel> {
        if l < 1 {
            return Err(Error::invalid("tap truncation needs L >= 1"));
        }
        let taps = self.largest_taps(l);
        let kept: f64 = taps.iter().map(|t| t.value.norm_sqr()).sum();
        Ok(TruncatedChannel {
            n: self.n(),
            m: self.m(),
            taps,
            residual_energy: (self.energy() - kept).max(0.0),
        })
    }

    /// Nonzero-tap count above `tol`.
    pub fn support(&self, tol: f64) -> usize {
        self.taps.as_slice().iter().filter(|v| v.norm() > tol).count()
    }

    /// TF-domain diagonal that realizes this convolution: `sqrt(NM) isfft(h_w)`.
    pub fn tf_diagonal(&self, plan: &TransformPlan) -> Result<TfFrame> {
        let s = ((self.n() * self.m()) as f64).sqrt();
        Ok(plan.isfft(&self.taps)?.map(|v| v * s))
    }

    /// Applies the 2D circular convolution `y = h_w (*) x` via the TF domain.
    pub fn apply(&self, plan: &TransformPlan, x: &DdFrame) -> Result<DdFrame> {
        let g = self.tf_diagonal(plan)?;
        plan.sfft(&plan.isfft(x)?.hadamard(&g)?)
    }
}

/// Effective channel from a TF diagonal that already includes the windows.
pub fn effective_from_tf(plan: &TransformPlan, g: &TfFrame) -> Result<EffectiveDdChannel> {
    let s = 1.0 / ((g.rows() * g.cols()) as f64).sqrt();
    Ok(EffectiveDdChannel {
        taps: plan.sfft(g)?.map(|v| v * s),
    })
}

/// Effective DD channel `h_w` for a channel and window pair, via the TF domain.
pub fn effective_dd_channel(plan: &TransformPlan, ch: &ChannelRealization, windows: &WindowPair) -> Result<EffectiveDdChannel> {
    check_windows(ch, windows)?;
    let g = tf_channel(ch).hadamard(&windows.joint())?;
    effective_from_tf(plan, &g)
}

/// Effective DD channel by direct evaluation of `sum_i h_i w(k - nu_i, l - l_i) phase_i`.
pub fn effective_dd_channel_direct(ch: &ChannelRealization, windows: &WindowPair) -> Result<EffectiveDdChannel> {
    check_windows(ch, windows)?;
    let (n, m) = (ch.grid.n, ch.grid.m);
    let taps = DdFrame::from_fn(n, m, |k, l| {
        ch.paths
            .iter()
            .map(|p| {
                p.h * p.phase(n, m) * dd_filter_w(windows, k as f64 - p.doppler(), l as f64 - p.l_tau as f64)
            })
            .sum()
    });
    Ok(EffectiveDdChannel { taps })
}

fn check_windows(ch: &ChannelRealization, windows: &WindowPair) -> Result<()> {
    if windows.n() != ch.grid.n || windows.m() != ch.grid.m {
        return Err(Error::shape(
            format!("{}x{}", ch.grid.n, ch.grid.m),
            format!("{}x{}", windows.n(), windows.m()),
        ));
    }
    Ok(())
}

/// Noise filter `v_z[k, l] = (1/NM) sum V e^{-j 2 pi n k / N} e^{j 2 pi m l / M}`.
pub fn noise_filter_vz(plan: &TransformPlan, v: &TfFrame) -> Result<DdFrame> {
    let s = 1.0 / ((v.rows() * v.cols()) as f64).sqrt();
    Ok(plan.sfft(v)?.map(|x| x * s))
}

/// Dense DD channel matrix
/// `(F_N (x) F_M^H) V (I (x) F_M) H_t (I (x) F_M^H) U (F_N^H (x) F_M)`.
pub fn dd_channel_matrix(ch: &ChannelRealization, windows: &WindowPair) -> Result<CMatrix> {
    check_windows(ch, windows)?;
    let (n, m) = (ch.grid.n, ch.grid.m);
    let ops = build_kron_operators(m, n)?;
    let h_t = time_channel(&tf_channel(ch))?;
    let diag = |w: &TfFrame| CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(w.as_slice()));
    let v = diag(&windows.rx.to_grid());
    let u = diag(&windows.tx.to_grid());
    Ok(&ops.a_demod * v * &ops.a_tf * h_t * ops.a_tf.adjoint() * u * &ops.a_mod)
}

/// Dense 2D circular-convolution matrix generated by `h`:
/// `H[kM + l, k'M + l'] = h[(k - k')_N, (l - l')_M]`.
pub fn convolution_matrix(h: &DdFrame) -> Result<CMatrix> {
    let (n, m) = (h.rows(), h.cols());
    check_oracle_size(n * m)?;
    Ok(CMatrix::from_fn(n * m, n * m, |r, c| {
        let (k, l) = (r / m, r % m);
        let (kp, lp) = (c / m, c % m);
        h.get_wrapped(k as i64 - kp as i64, l as i64 - lp as i64)
    }))
}

/// Power split of an effective channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerReport {
    /// `sum |h_w|^2`.
    pub total: f64,
    /// `sum_i |h_i|^2 sum |w(. - nu_i, . - l_i)|^2`.
    pub per_path: f64,
    /// Inter-spread between paths, `total - per_path`.
    pub cross: f64,
}

/// Splits effective-channel power into per-path and cross terms.
///
/// Requires a jointly normalized window pair, `sum |V U|^2 = MN`.
pub fn effective_power_report(plan: &TransformPlan, ch: &ChannelRealization, windows: &WindowPair) -> Result<PowerReport> {
    windows.check_joint_normalized(1e-9)?;
    let total = effective_dd_channel(plan, ch, windows)?.energy();
    let mut per_path = 0.0;
    for p in &ch.paths {
        let single = ChannelRealization::new(ch.grid, vec![*p]);
        per_path += effective_dd_channel(plan, &single, windows)?.energy();
    }
    Ok(PowerReport {
        total,
        per_path,
        cross: total - per_path,
    })
}

/// Position of an integer-Doppler path's tap on the grid.
pub fn integer_tap_position(p: &PathSpec, n: usize) -> (usize, usize) {
    (doppler_bin(p.k_nu, n), p.l_tau)
}
