//! The `evolve`, `sweep`, `portrait`, `fit` and `render` commands, as library
//! functions so they can be driven from tests and the Python bindings.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    detect_detrapping_time, fit_power_law, sliding_slopes, DetrapResult, PowerLawFit,
};
use crate::config::{RunConfig, SweepConfig};
use crate::evolution::{evolve, RunRecord, StepParams};
use crate::io::{self, fmt_f64, Table};
use crate::lattice::WalkerState;
use crate::observables::{phase_portrait_every, TimeSeries};
use crate::svg::{self, PlotSpec, Series, Style};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const PORTRAIT_FILE: &str = "portrait.csv";
pub const TAU_C_FILE: &str = "tau_c.csv";
pub const RUN_META_FILE: &str = "run_meta.json";

pub fn density_file(t: u64) -> String {
    format!("density_{t}.csv")
}

/// Slope dump of the `k`-th point (in χ order) of a sweep.
pub fn slopes_file(k: usize) -> String {
    format!("slopes_{k}.csv")
}

fn prepare_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output dir {}", dir.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Runs the simulation described by `cfg` with the given snapshot cadence.
pub fn simulate(cfg: &RunConfig, record_every: usize) -> anyhow::Result<RunRecord> {
    cfg.validate()?;
    let params = StepParams::new(cfg.chi)?;
    let initial = WalkerState::new_localized(cfg.start_position, cfg.input.vector())?;
    Ok(evolve(&initial, params, cfg.steps, record_every)?)
}

/// Writes `timeseries.csv`, one `density_<t>.csv` per snapshot and
/// `run_meta.json` into `cfg.output_dir`.
pub fn cmd_evolve(cfg: &RunConfig) -> anyhow::Result<RunRecord> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    let rec = simulate(cfg, cfg.record_every)?;
    io::write_timeseries(&dir.join(TIMESERIES_FILE), &rec.sp, &rec.pr, &rec.norm)?;
    for snap in &rec.snapshots {
        io::write_density(&dir.join(density_file(snap.t)), snap)?;
    }
    write_json(&dir.join(RUN_META_FILE), cfg)?;
    log::info!(
        "evolve chi={} input={} steps={} -> {}",
        cfg.chi,
        cfg.input,
        cfg.steps,
        dir.display()
    );
    Ok(rec)
}

/// Writes `portrait.csv` (t, SP, dSP_dt) and `run_meta.json`.
///
/// The portrait covers the evolved steps `t = 1..=steps` (the localized
/// initial condition is not part of the orbit), so a run of `steps` steps
/// gives `steps - 1` rows.
pub fn cmd_portrait(cfg: &RunConfig) -> anyhow::Result<Vec<crate::PortraitPoint>> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    prepare_dir(dir)?;
    let rec = simulate(cfg, cfg.steps)?;
    let evolved = TimeSeries::new("SP", 1, rec.sp.values()[1..].to_vec());
    let points = phase_portrait_every(&evolved, cfg.portrait_every)?;
    io::write_portrait(&dir.join(PORTRAIT_FILE), &points)?;
    write_json(&dir.join(RUN_META_FILE), cfg)?;
    Ok(points)
}

/// One row of `tau_c.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub chi: f64,
    pub outcome: Result<DetrapResult, String>,
    /// Sliding PR slopes by window start, kept only when requested.
    pub slopes: Option<Vec<f64>>,
}

fn sweep_point(cfg: &RunConfig, chi: f64, keep_slopes: bool) -> SweepRow {
    let point = RunConfig { chi, ..cfg.clone() };
    match simulate(&point, point.steps) {
        Ok(rec) => SweepRow {
            chi,
            outcome: detect_detrapping_time(&rec.pr, &point.detrap).map_err(|e| e.to_string()),
            slopes: keep_slopes.then(|| sliding_slopes(rec.pr.values(), point.detrap.window)),
        },
        Err(e) => SweepRow {
            chi,
            outcome: Err(e.to_string()),
            slopes: None,
        },
    }
}

/// Runs the detector on every χ of the sweep. Rows come back in χ order
/// regardless of how many workers ran them.
pub fn run_sweep(cfg: &SweepConfig) -> anyhow::Result<Vec<SweepRow>> {
    let chis = cfg.chis()?;
    let mut base = cfg.run.clone();
    base.chi = chis[0];
    base.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .context("building sweep worker pool")?;
    let rows = pool.install(|| {
        chis.par_iter()
            .map(|&chi| sweep_point(&base, chi, cfg.dump_slopes))
            .collect::<Vec<_>>()
    });
    Ok(rows)
}

pub fn write_tau_c(path: &Path, rows: &[SweepRow]) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["chi", "tau_c", "baseline_slope", "trigger_slope", "error"])?;
    for row in rows {
        let chi = fmt_f64(row.chi);
        match &row.outcome {
            Ok(d) => w.write_record([
                chi,
                d.tau_c.map(|t| t.to_string()).unwrap_or_default(),
                fmt_f64(d.baseline_slope),
                fmt_f64(d.trigger_slope),
                String::new(),
            ])?,
            Err(e) => {
                w.write_record([chi, String::new(), String::new(), String::new(), e.clone()])?
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// `t_start,slope`, the window start being the step of its first sample.
pub fn write_slopes(path: &Path, slopes: &[f64]) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(["t_start", "slope"])?;
    for (t, s) in slopes.iter().enumerate() {
        w.write_record([t.to_string(), fmt_f64(*s)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `tau_c.csv` and the resolved sweep config as `run_meta.json`,
/// plus `slopes_<k>.csv` per point when `dump_slopes` is set.
pub fn cmd_sweep(cfg: &SweepConfig) -> anyhow::Result<Vec<SweepRow>> {
    let dir = &cfg.run.output_dir;
    prepare_dir(dir)?;
    let rows = run_sweep(cfg)?;
    write_tau_c(&dir.join(TAU_C_FILE), &rows)?;
    for (k, row) in rows.iter().enumerate() {
        if let Some(slopes) = &row.slopes {
            write_slopes(&dir.join(slopes_file(k)), slopes)?;
        }
    }
    write_json(&dir.join(RUN_META_FILE), cfg)?;
    for r in rows.iter().filter(|r| r.outcome.is_err()) {
        log::warn!(
            "sweep point chi={} failed: {}",
            r.chi,
            r.outcome.as_ref().unwrap_err()
        );
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub file: PathBuf,
    pub column: String,
    #[serde(flatten)]
    pub fit: PowerLawFit,
}

/// Fits a power law to `column` of a CSV over `[t_min, t_max]` (default: up
/// to the last row) and writes the report as JSON to `out`, or next to the
/// input as `<stem>_<column>_fit.json`.
pub fn cmd_fit(
    series_file: &Path,
    column: &str,
    t_min: u64,
    t_max: Option<u64>,
    bin_ratio: f64,
    out: Option<&Path>,
) -> anyhow::Result<(FitReport, PathBuf)> {
    let table = Table::read(series_file)?;
    let series = table.series(column)?;
    let t_max = match t_max {
        Some(t) => t,
        None => series.end().context("series is empty")?,
    };
    let fit = fit_power_law(&series, t_min, t_max, bin_ratio)?;
    let report = FitReport {
        file: series_file.to_path_buf(),
        column: column.to_string(),
        fit,
    };
    let out = match out {
        Some(p) => p.to_path_buf(),
        None => {
            let stem = series_file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "series".into());
            series_file.with_file_name(format!("{stem}_{column}_fit.json"))
        }
    };
    write_json(&out, &report)?;
    Ok((report, out))
}

#[derive(Clone, Debug, Default)]
pub struct RenderOptions {
    /// X column; defaults to the first column of the file.
    pub x: Option<String>,
    /// Y columns; defaults to every column except `x`.
    pub columns: Vec<String>,
    pub log_x: bool,
    pub log_y: bool,
    pub scatter: bool,
}

/// Plots columns of a CSV as an SVG file.
pub fn cmd_render(series_file: &Path, opts: &RenderOptions, out: &Path) -> anyhow::Result<()> {
    let table = Table::read(series_file)?;
    let x_name = match &opts.x {
        Some(x) => x.clone(),
        None => table.headers.first().context("CSV has no columns")?.clone(),
    };
    let xs = table.column(&x_name)?;
    let columns: Vec<String> = if opts.columns.is_empty() {
        table
            .headers
            .iter()
            .filter(|h| **h != x_name)
            .cloned()
            .collect()
    } else {
        opts.columns.clone()
    };
    let mut series = Vec::with_capacity(columns.len());
    for name in &columns {
        let ys = table.column(name)?;
        series.push(Series {
            name: name.clone(),
            points: xs.iter().copied().zip(ys.iter().copied()).collect(),
        });
    }
    let spec = PlotSpec {
        title: series_file
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        x_label: x_name,
        log_x: opts.log_x,
        log_y: opts.log_y,
        style: if opts.scatter {
            Style::Scatter
        } else {
            Style::Line
        },
    };
    fs::write(out, svg::render(&series, &spec))
        .with_context(|| format!("writing {}", out.display()))
}
