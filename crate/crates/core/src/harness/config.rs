//! Experiment configuration: a flat TOML document, unknown keys rejected.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::ChannelProfile;
use crate::error::{Error, Result};
use crate::estimation::{max_k_hat, PilotLayout};
use crate::grid::{FrameGrid, Modulation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    CeMse,
    Fer,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::CeMse => "ce-mse",
            ExperimentKind::Fer => "fer",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TxWindowKind {
    #[default]
    Rect,
    Dc,
    Optimal,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RxWindowKind {
    #[default]
    Rect,
    Dc,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    #[default]
    Mmse,
    Spa,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CsiMode {
    #[default]
    #[serde(rename = "perfect-csir")]
    PerfectCsir,
    #[serde(rename = "estimated-csir")]
    EstimatedCsir,
    #[serde(rename = "csit+csir")]
    CsitCsir,
}

fn d_delta_f() -> f64 {
    5e3
}
fn d_fc() -> f64 {
    3e9
}
fn d_true() -> bool {
    true
}
fn d_pilot() -> f64 {
    30.0
}
fn d_sl() -> f64 {
    -40.0
}
fn d_modulation() -> Modulation {
    Modulation::Qpsk
}
fn d_iters() -> usize {
    20
}
fn d_damping() -> f64 {
    0.5
}
fn d_trials() -> usize {
    1000
}
fn d_target() -> u64 {
    100
}
fn d_batch() -> usize {
    250
}
fn d_seed() -> u64 {
    1
}

/// One experiment. Field order is the canonical order used for hashing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Delay bins / subcarriers.
    pub m: usize,
    /// Doppler bins / time slots.
    pub n: usize,
    #[serde(default = "d_delta_f")]
    pub delta_f: f64,
    #[serde(default = "d_fc")]
    pub fc: f64,
    /// Number of paths `P`.
    pub paths: usize,
    pub k_max: usize,
    pub l_max: usize,
    #[serde(default = "d_true")]
    pub fractional_doppler: bool,
    /// Pilot power in dBW relative to unit symbol energy.
    #[serde(default = "d_pilot")]
    pub pilot_dbw: f64,
    #[serde(default)]
    pub k_hat: usize,
    #[serde(default)]
    pub tx_window: TxWindowKind,
    #[serde(default)]
    pub rx_window: RxWindowKind,
    #[serde(default = "d_sl")]
    pub dc_sidelobe_db: f64,
    #[serde(default = "d_modulation")]
    pub modulation: Modulation,
    #[serde(default)]
    pub detector: DetectorKind,
    /// SPA tap count `L`; defaults to `3 P - 1`.
    #[serde(default)]
    pub spa_taps: Option<usize>,
    #[serde(default = "d_iters")]
    pub spa_iters: usize,
    #[serde(default = "d_damping")]
    pub spa_damping: f64,
    #[serde(default)]
    pub csi: CsiMode,
    /// SNR points, `SNR = 1 / N0`.
    pub snr_db: Vec<f64>,
    /// Trials per SNR point (CE), or the per-point trial cap (FER).
    #[serde(default = "d_trials")]
    pub trials: usize,
    /// FER stops a point once this many frame errors are seen.
    #[serde(default = "d_target")]
    pub target_frame_errors: u64,
    /// FER trials are run in batches of this size between stop checks.
    #[serde(default = "d_batch")]
    pub batch: usize,
    #[serde(default = "d_seed")]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<FrameGrid> {
        FrameGrid::new(self.m, self.n, self.delta_f, self.fc)
    }

    pub fn profile(&self) -> ChannelProfile {
        ChannelProfile {
            paths: self.paths,
            k_max: self.k_max,
            l_max: self.l_max,
            fractional: self.fractional_doppler,
        }
    }

    pub fn layout(&self) -> Result<PilotLayout> {
        PilotLayout::centered(self.n, self.m, self.k_max, self.l_max, self.k_hat, self.pilot_dbw)
    }

    /// SPA tap count, `3 P - 1` unless set.
    pub fn spa_taps(&self) -> usize {
        self.spa_taps.unwrap_or(3 * self.paths - 1)
    }

    /// Short window label, e.g. `rect`, `dc-tx`, `dc-rx`, `optimal`.
    pub fn window_label(&self) -> String {
        match (self.tx_window, self.rx_window) {
            (TxWindowKind::Rect, RxWindowKind::Rect) => "rect".into(),
            (TxWindowKind::Dc, RxWindowKind::Rect) => "dc-tx".into(),
            (TxWindowKind::Rect, RxWindowKind::Dc) => "dc-rx".into(),
            (TxWindowKind::Dc, RxWindowKind::Dc) => "dc-both".into(),
            (TxWindowKind::Optimal, RxWindowKind::Rect) => "optimal".into(),
            (TxWindowKind::Optimal, RxWindowKind::Dc) => "optimal-dc-rx".into(),
        }
    }

    /// Validates every field and cross-field constraint.
    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        self.grid().map_err(|e| Error::Config(e.to_string()))?;
        self.profile()
            .validate(&self.grid()?)
            .map_err(|e| Error::Config(e.to_string()))?;
        if (self.k_hat as i64) > max_k_hat(self.n, self.k_max) {
            return cfg(format!(
                "k_hat = {} exceeds the maximum of {} for N = {}, k_max = {}",
                self.k_hat,
                max_k_hat(self.n, self.k_max),
                self.n,
                self.k_max
            ));
        }
        self.layout().map_err(|e| Error::Config(e.to_string()))?;
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return cfg("snr_db must be a non-empty list of finite values".into());
        }
        if self.trials == 0 || self.batch == 0 {
            return cfg("trials and batch must be positive".into());
        }
        let uses_dc = self.tx_window == TxWindowKind::Dc || self.rx_window == RxWindowKind::Dc;
        if uses_dc && !(self.dc_sidelobe_db.is_finite() && self.dc_sidelobe_db <= -10.0) {
            return cfg(format!("dc_sidelobe_db must be <= -10, got {}", self.dc_sidelobe_db));
        }
        let optimal = self.tx_window == TxWindowKind::Optimal;
        let csit = self.csi == CsiMode::CsitCsir;
        if optimal != csit {
            return cfg("tx_window = \"optimal\" and csi = \"csit+csir\" must be used together".into());
        }
        if self.experiment == ExperimentKind::CeMse && optimal {
            return cfg("the optimal TX window needs CSIT and is not defined for ce-mse".into());
        }
        if self.detector == DetectorKind::Spa {
            let l = self.spa_taps();
            if l == 0 {
                return cfg("spa_taps must be at least 1".into());
            }
            let q: u128 = if self.modulation == Modulation::Bpsk { 2 } else { 4 };
            let need = q.checked_pow(l as u32).unwrap_or(u128::MAX);
            if need > crate::detection::SpaConfig::default().budget {
                return cfg(format!("SPA factor size Q^L = {need} exceeds the budget of 65536"));
            }
            if self.spa_iters == 0 || !(0.0..1.0).contains(&self.spa_damping) {
                return cfg("spa_iters must be positive and spa_damping in [0, 1)".into());
            }
        }
        Ok(())
    }

    /// Canonical JSON used for hashing and metadata.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON.
    pub fn hash(&self) -> String {
        hash_str(&self.canonical_json())
    }
}

/// First 16 hex digits of the SHA-256 of a string.
pub fn hash_str(s: &str) -> String {
    let digest = Sha256::digest(s.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}
