//! Monte Carlo experiments: channel-estimation MSE and frame error rate.
//!
//! One trial draws a channel, builds the windows, sends a pilot-bearing
//! frame through `y = sfft(V H U isfft(x) + V Z)` and then estimates or
//! detects. Trials are run in parallel and merged in trial order.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::{CsiMode, DetectorKind, ExperimentConfig, RxWindowKind, TxWindowKind};
use super::rng::trial_rng;
use crate::channel::{effective_from_tf, sample_channel, tf_channel, EffectiveDdChannel};
use crate::detection::{count_errors, mmse_detect_tf, spa_detect, ErrorTally, SpaConfig};
use crate::error::{Error, Result};
use crate::estimation::{estimate_channel, measured_ce_mse, pilot_scaled_mse_floor, predicted_mse_floor, PilotLayout};
use crate::grid::{Constellation, DdFrame, FrameGrid, TfFrame};
use crate::transforms::TransformPlan;
use crate::windows::{dc_window, optimal_tx_window, Window};

/// One output row.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub config_hash: String,
    pub snr_db: f64,
    pub metric: String,
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: u64,
}

/// Companion row of the channel-estimation experiment.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CeRow {
    pub snr_db: f64,
    pub pilot_dbw: f64,
    pub window: String,
    pub khat: usize,
    pub mse_measured: f64,
    pub mse_predicted: f64,
}

/// Rows produced by one experiment run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub ce_rows: Vec<CeRow>,
}

/// Wilson score interval for `k` successes in `n` trials at 95%.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Mean and 95% normal-approximation interval.
pub fn mean_interval(samples: &[f64]) -> (f64, f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, mean, mean);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let half = 1.959_963_984_540_054 * (var / n).sqrt();
    (mean, mean - half, mean + half)
}

/// Everything that stays fixed across the trials of one experiment.
pub struct LinkSetup {
    pub grid: FrameGrid,
    pub plan: TransformPlan,
    pub layout: PilotLayout,
    pub constellation: Constellation,
    pub data_cells: Vec<usize>,
    /// TX window (unit mean power); `None` when it is computed per trial.
    pub tx: Option<Window>,
    /// RX window (unit mean power).
    pub rx: Window,
    /// Sidelobe level fed to the analytic floor.
    pub sidelobe: f64,
    cfg: ExperimentConfig,
}

/// One simulated frame.
pub struct TrialFrame {
    /// Transmitted frame including pilot and guard.
    pub x: DdFrame,
    /// Data symbol indices per cell (zero at non-data cells).
    pub indices: Vec<usize>,
    /// Received DD frame.
    pub y: DdFrame,
    /// End-to-end TF diagonal `V U H`.
    pub g: TfFrame,
    /// RX window grid.
    pub v: TfFrame,
    pub n0: f64,
}

impl LinkSetup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        let layout = cfg.layout()?;
        let dc = if cfg.tx_window == TxWindowKind::Dc || cfg.rx_window == RxWindowKind::Dc {
            Some(dc_window(cfg.n, cfg.dc_sidelobe_db)?)
        } else {
            None
        };
        let make = |use_dc: bool| -> Result<Window> {
            match (&dc, use_dc) {
                (Some(d), true) => Window::doppler_only(&d.coeffs, cfg.m).power_normalized(),
                _ => Ok(Window::rectangular(cfg.n, cfg.m)),
            }
        };
        let tx = match cfg.tx_window {
            TxWindowKind::Optimal => None,
            kind => Some(make(kind == TxWindowKind::Dc)?),
        };
        let rx = make(cfg.rx_window == RxWindowKind::Dc)?;
        let sidelobe = match &dc {
            Some(_) => 10f64.powf(cfg.dc_sidelobe_db / 20.0),
            None => 1.0 / cfg.n as f64,
        };
        Ok(Self {
            grid,
            plan: TransformPlan::new(cfg.m, cfg.n),
            data_cells: layout.data_cells(),
            layout,
            constellation: Constellation::new(cfg.modulation),
            tx,
            rx,
            sidelobe,
            cfg: cfg.clone(),
        })
    }

    /// Draws channel, symbols and noise for one trial and runs the link.
    pub fn simulate(&self, rng: &mut ChaCha8Rng, snr_db: f64) -> Result<TrialFrame> {
        let (n, m) = (self.grid.n, self.grid.m);
        let n0 = 10f64.powf(-snr_db / 10.0);
        let ch = sample_channel(&self.grid, &self.cfg.profile(), rng)?;
        let h = tf_channel(&ch);
        let u = match &self.tx {
            Some(w) => w.to_grid(),
            None => {
                let lambda: Vec<f64> = h.as_slice().iter().map(|v| v.norm_sqr() / n0).collect();
                optimal_tx_window(&lambda)?.window(n, m)?.to_grid()
            }
        };
        let v = self.rx.to_grid();
        let g = h.hadamard(&u)?.hadamard(&v)?;

        let q = self.constellation.size();
        let mut data = DdFrame::zeros(n, m);
        let mut indices = vec![0usize; n * m];
        for &cell in &self.data_cells {
            let s = rng.random_range(0..q);
            indices[cell] = s;
            data.as_mut_slice()[cell] = self.constellation.point(s);
        }
        let x = crate::estimation::embed_pilot(&data, &self.layout)?;

        let sd = (n0 / 2.0).sqrt();
        let noise = TfFrame::from_fn(n, m, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * sd, im * sd)
        });
        let rx_tf = self.plan.isfft(&x)?.hadamard(&g)?;
        let noisy: Vec<Complex64> = rx_tf
            .as_slice()
            .iter()
            .zip(noise.as_slice())
            .zip(v.as_slice())
            .map(|((s, z), w)| s + z * w)
            .collect();
        let y = self.plan.sfft(&TfFrame::from_vec(n, m, noisy)?)?;
        Ok(TrialFrame { x, indices, y, g, v, n0 })
    }

    /// Pilot-only frame.
    pub fn pilot_frame(&self) -> DdFrame {
        let mut p = DdFrame::zeros(self.grid.n, self.grid.m);
        p[(self.layout.k_p, self.layout.l_p)] = self.layout.x_p;
        p
    }

    /// Read-window estimation error of one trial.
    pub fn ce_trial(&self, rng: &mut ChaCha8Rng, snr_db: f64) -> Result<f64> {
        let t = self.simulate(rng, snr_db)?;
        let truth = effective_from_tf(&self.plan, &t.g)?;
        let est = estimate_channel(&t.y, &self.layout, t.n0)?;
        Ok(measured_ce_mse(&truth, &est, &self.layout))
    }

    /// Detects one trial and counts errors over the data cells.
    pub fn fer_trial(&self, rng: &mut ChaCha8Rng, snr_db: f64) -> Result<ErrorTally> {
        let t = self.simulate(rng, snr_db)?;
        let truth = effective_from_tf(&self.plan, &t.g)?;
        let channel: EffectiveDdChannel = match self.cfg.csi {
            CsiMode::EstimatedCsir => estimate_channel(&t.y, &self.layout, t.n0)?,
            _ => truth,
        };
        // Remove the known pilot with the channel the receiver believes in.
        let pilot_rx = channel.apply(&self.plan, &self.pilot_frame())?;
        let y: Vec<Complex64> = t.y.as_slice().iter().zip(pilot_rx.as_slice()).map(|(a, b)| a - b).collect();
        let y = DdFrame::from_vec(self.grid.n, self.grid.m, y)?;
        let hard = match self.cfg.detector {
            DetectorKind::Mmse => {
                let g = match self.cfg.csi {
                    CsiMode::EstimatedCsir => channel.tf_diagonal(&self.plan)?,
                    _ => t.g.clone(),
                };
                mmse_detect_tf(&self.plan, &y, &g, &t.v, t.n0, &self.constellation)?.hard
            }
            DetectorKind::Spa => {
                let trunc = channel.truncate(self.cfg.spa_taps())?;
                let noise_var = t.n0 * t.v.energy() / t.v.len() as f64;
                let cfg = SpaConfig {
                    iterations: self.cfg.spa_iters,
                    damping: self.cfg.spa_damping,
                    ..SpaConfig::default()
                };
                let known = DdFrame::zeros(self.grid.n, self.grid.m);
                spa_detect(&y, &trunc, &known, &self.data_cells, noise_var, &self.constellation, &cfg)?
                    .report
                    .hard
            }
        };
        count_errors(&hard, &t.indices, &self.constellation, Some(&self.data_cells))
    }
}

fn run_parallel<T: Send>(range: std::ops::Range<u64>, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    range.into_par_iter().map(f).collect()
}

/// Channel-estimation MSE sweep.
pub fn run_ce_mse(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let setup = LinkSetup::new(cfg)?;
    let hash = cfg.hash();
    let floor = predicted_mse_floor(&setup.layout, setup.sidelobe);
    let scaled = pilot_scaled_mse_floor(&setup.layout, setup.sidelobe);
    let mut out = ExperimentOutput::default();
    for (point, &snr) in cfg.snr_db.iter().enumerate() {
        let samples = run_parallel(0..cfg.trials as u64, |t| {
            setup.ce_trial(&mut trial_rng(cfg.seed, point as u64, t), snr)
        })?;
        let (mean, lo, hi) = mean_interval(&samples);
        if !mean.is_finite() {
            return Err(Error::Numerical(format!("non-finite CE MSE at {snr} dB")));
        }
        let trials = samples.len() as u64;
        let row = |metric: &str, value: f64, lo: f64, hi: f64| ResultRow {
            experiment: "ce-mse".into(),
            config_hash: hash.clone(),
            snr_db: snr,
            metric: metric.into(),
            value,
            ci_lo: lo,
            ci_hi: hi,
            trials,
        };
        let db = |v: f64| 10.0 * v.max(f64::MIN_POSITIVE).log10();
        out.rows.push(row("mse", mean, lo, hi));
        out.rows.push(row("mse_db", db(mean), db(lo), db(hi)));
        out.rows.push(row("mse_floor", floor, floor, floor));
        out.rows.push(row("mse_floor_pilot_scaled", scaled, scaled, scaled));
        out.ce_rows.push(CeRow {
            snr_db: snr,
            pilot_dbw: cfg.pilot_dbw,
            window: cfg.window_label(),
            khat: cfg.k_hat,
            mse_measured: mean,
            mse_predicted: scaled,
        });
    }
    Ok(out)
}

/// Frame-error-rate sweep with early stopping on frame errors.
pub fn run_fer(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let setup = LinkSetup::new(cfg)?;
    let hash = cfg.hash();
    let mut out = ExperimentOutput::default();
    for (point, &snr) in cfg.snr_db.iter().enumerate() {
        let tally = fer_point(&setup, cfg, point as u64, snr)?;
        let (flo, fhi) = wilson_interval(tally.frame_errors, tally.frames);
        let (blo, bhi) = wilson_interval(tally.bit_errors, tally.bits);
        let mk = |metric: &str, value: f64, lo: f64, hi: f64| ResultRow {
            experiment: "fer".into(),
            config_hash: hash.clone(),
            snr_db: snr,
            metric: metric.into(),
            value,
            ci_lo: lo,
            ci_hi: hi,
            trials: tally.frames,
        };
        out.rows.push(mk("fer", tally.fer(), flo, fhi));
        out.rows.push(mk("ber", tally.ber(), blo, bhi));
        let fe = tally.frame_errors as f64;
        out.rows.push(mk("frame_errors", fe, fe, fe));
    }
    Ok(out)
}

/// Runs one FER point in fixed batches until the error target or trial cap is reached.
pub fn fer_point(setup: &LinkSetup, cfg: &ExperimentConfig, point: u64, snr_db: f64) -> Result<ErrorTally> {
    let mut tally = ErrorTally::default();
    let cap = cfg.trials as u64;
    let mut start = 0u64;
    while start < cap && tally.frame_errors < cfg.target_frame_errors {
        let end = (start + cfg.batch as u64).min(cap);
        let batch = run_parallel(start..end, |t| setup.fer_trial(&mut trial_rng(cfg.seed, point, t), snr_db))?;
        for b in &batch {
            tally.merge(b);
        }
        start = end;
    }
    Ok(tally)
}

/// Dispatches on the configured experiment kind.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    match cfg.experiment {
        super::config::ExperimentKind::CeMse => run_ce_mse(cfg),
        super::config::ExperimentKind::Fer => run_fer(cfg),
    }
}
