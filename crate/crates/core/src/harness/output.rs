//! CSV / JSON writers for result rows.

use std::fmt::Write as _;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiment::{CeRow, ResultRow};

/// Mandatory header of the result CSV.
pub const CSV_HEADER: &str = "experiment,config_hash,snr_db,metric,value,ci_lo,ci_hi,trials";

/// Header of the channel-estimation companion CSV.
pub const CE_CSV_HEADER: &str = "snr_db,pilot_dbw,window,khat,mse_measured,mse_predicted";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.experiment, r.config_hash, r.snr_db, r.metric, r.value, r.ci_lo, r.ci_hi, r.trials
        );
    }
    s
}

pub fn rows_to_json(rows: &[ResultRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
    s.push('\n');
    s
}

pub fn render(rows: &[ResultRow], format: Format) -> String {
    match format {
        Format::Csv => rows_to_csv(rows),
        Format::Json => rows_to_json(rows),
    }
}

pub fn ce_rows_to_csv(rows: &[CeRow]) -> String {
    let mut s = String::from(CE_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.snr_db, r.pilot_dbw, r.window, r.khat, r.mse_measured, r.mse_predicted
        );
    }
    s
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    config_hash: String,
    config: &'a ExperimentConfig,
}

/// Metadata sidecar echoing the full configuration.
pub fn metadata_json(cfg: &ExperimentConfig) -> String {
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.hash(),
        config: cfg,
    };
    let mut s = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    s.push('\n');
    s
}

/// `path` with `suffix` appended to its file name.
pub fn sidecar_path(path: &std::path::Path, suffix: &str) -> std::path::PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            experiment: "fer".into(),
            config_hash: "abc".into(),
            snr_db: 10.0,
            metric: "fer".into(),
            value: 0.25,
            ci_lo: 0.1,
            ci_hi: 0.4,
            trials: 100,
        }
    }

    #[test]
    fn csv_layout() {
        let s = rows_to_csv(&[row()]);
        assert_eq!(s, format!("{CSV_HEADER}\nfer,abc,10,fer,0.25,0.1,0.4,100\n"));
    }

    #[test]
    fn json_mirrors_rows() {
        let v: serde_json::Value = serde_json::from_str(&rows_to_json(&[row()])).unwrap();
        assert_eq!(v[0]["metric"], "fer");
        assert_eq!(v[0]["trials"], 100);
    }

    #[test]
    fn sidecar_names() {
        let p = sidecar_path(std::path::Path::new("/tmp/out.csv"), ".meta.json");
        assert_eq!(p, std::path::PathBuf::from("/tmp/out.csv.meta.json"));
    }
}
