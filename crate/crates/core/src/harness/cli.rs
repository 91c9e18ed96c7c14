//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{hash_str, ExperimentConfig, ExperimentKind};
use super::experiment::{run_ce_mse, run_fer, ResultRow};
use super::output::{ce_rows_to_csv, metadata_json, render, sidecar_path, Format};
use super::selfcheck::run_selfcheck;
use crate::error::{Error, Result};
use crate::estimation::{mse_floor, leaking_bins, pilot_amplitude, max_k_hat};
use crate::windows::dc_window;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "otfs", version, about = "OTFS link-level simulation", allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Channel-estimation MSE sweep.
    CeMse(RunArgs),
    /// Frame-error-rate sweep.
    Fer(RunArgs),
    /// Design a Dolph-Chebyshev window.
    DesignWindow(DesignArgs),
    /// Analytic channel-estimation floor.
    Floor(FloorArgs),
    /// Run the cross-oracle self check.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct DesignArgs {
    /// Window length.
    #[arg(long = "N")]
    n: usize,
    /// Sidelobe level in dB (negative).
    #[arg(long = "sl-db", allow_hyphen_values = true)]
    sl_db: f64,
    /// CSV output; the JSON sidecar goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct FloorArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long)]
    kmax: usize,
    #[arg(long)]
    lmax: usize,
    #[arg(long)]
    khat: usize,
    /// Window sidelobe level in dB.
    #[arg(long = "sl-db", allow_hyphen_values = true)]
    sl_db: f64,
    /// Pilot power in dBW; adds the pilot-scaled floor row.
    #[arg(long = "pilot-dbw", allow_hyphen_values = true)]
    pilot_dbw: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct SelfcheckArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

/// Maps a library error to an exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Singular(_) | Error::Numerical(_) | Error::NoUsableChannel => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::CeMse(a) => run_experiment_cmd(a, ExperimentKind::CeMse),
        Command::Fer(a) => run_experiment_cmd(a, ExperimentKind::Fer),
        Command::DesignWindow(a) => design_window_cmd(a),
        Command::Floor(a) => floor_cmd(a),
        Command::Selfcheck(a) => selfcheck_cmd(a),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn run_experiment_cmd(a: RunArgs, kind: ExperimentKind) -> Result<i32> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if cfg.experiment != kind {
        return Err(Error::Config(format!(
            "config describes a {} experiment, not {}",
            cfg.experiment.name(),
            kind.name()
        )));
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let threads = a.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let output = pool.install(|| match kind {
        ExperimentKind::CeMse => run_ce_mse(&cfg),
        ExperimentKind::Fer => run_fer(&cfg),
    })?;
    write_or_print(a.out.as_deref(), &render(&output.rows, a.format))?;
    if let Some(path) = &a.out {
        std::fs::write(sidecar_path(path, ".meta.json"), metadata_json(&cfg))?;
        if kind == ExperimentKind::CeMse {
            std::fs::write(sidecar_path(path, ".ce.csv"), ce_rows_to_csv(&output.ce_rows))?;
        }
    }
    Ok(EXIT_OK)
}

fn design_window_cmd(a: DesignArgs) -> Result<i32> {
    let w = dc_window(a.n, a.sl_db)?;
    let mut csv = String::from("index,value\n");
    for (i, v) in w.coeffs.iter().enumerate() {
        csv.push_str(&format!("{i},{v}\n"));
    }
    let meta = serde_json::json!({
        "SL_db_target": w.target_sidelobe_db,
        "SL_db_measured": w.measured_sidelobe_db,
        "k_main_measured": w.k_main,
        "SL_db_formula": w.formula_sidelobe_db,
        "N": a.n,
    });
    let meta = format!("{}\n", serde_json::to_string_pretty(&meta).expect("json"));
    match &a.out {
        Some(p) => {
            std::fs::write(p, &csv)?;
            std::fs::write(sidecar_path(p, ".json"), &meta)?;
        }
        None => {
            write_or_print(None, &csv)?;
            eprint!("{meta}");
        }
    }
    Ok(EXIT_OK)
}

fn floor_cmd(a: FloorArgs) -> Result<i32> {
    if !a.sl_db.is_finite() || a.sl_db >= 0.0 {
        return Err(Error::Config(format!("sl-db must be negative, got {}", a.sl_db)));
    }
    let max = max_k_hat(a.n, a.kmax);
    if (a.khat as i64) > max {
        return Err(Error::InfeasibleGuard { k_hat: a.khat, max });
    }
    let sl = 10f64.powf(a.sl_db / 20.0);
    let floor = mse_floor(a.n, a.kmax, a.lmax, a.khat, sl);
    let interference = leaking_bins(a.n, a.kmax, a.khat) as f64 * sl * sl;
    let overhead = ((2 * a.lmax + 1) * (4 * a.kmax + 4 * a.khat + 1)) as f64;
    let hash = hash_str(&format!(
        "floor N={} kmax={} lmax={} khat={} sl_db={} pilot_dbw={:?}",
        a.n, a.kmax, a.lmax, a.khat, a.sl_db, a.pilot_dbw
    ));
    let row = |metric: &str, v: f64| ResultRow {
        experiment: "floor".into(),
        config_hash: hash.clone(),
        snr_db: f64::INFINITY,
        metric: metric.into(),
        value: v,
        ci_lo: v,
        ci_hi: v,
        trials: 0,
    };
    let mut rows = vec![
        row("mse_floor", floor),
        row("interference_power", interference),
        row("overhead_cells", overhead),
    ];
    if let Some(p) = a.pilot_dbw {
        rows.push(row("mse_floor_pilot_scaled", floor / pilot_amplitude(p).powi(2)));
    }
    write_or_print(a.out.as_deref(), &render(&rows, a.format))?;
    Ok(EXIT_OK)
}

fn selfcheck_cmd(a: SelfcheckArgs) -> Result<i32> {
    let results = run_selfcheck(a.seed)?;
    let mut failed = 0;
    for r in &results {
        println!(
            "{} {} (error {:.3e}, tolerance {:.1e})",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.error,
            r.tolerance
        );
        if !r.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(Error::Numerical(format!("{failed} self-check(s) failed")));
    }
    Ok(EXIT_OK)
}
