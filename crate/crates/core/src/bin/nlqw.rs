use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use nlqw::commands::{self, RenderOptions};
use nlqw::config::{load_json, ChiGrid, RunConfig, SweepConfig};
use nlqw::CoinBasis;

/// Nonlinear three-state quantum walk simulator.
#[derive(Parser)]
#[command(name = "nlqw", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one walk; write timeseries.csv, density_<t>.csv and run_meta.json.
    Evolve(RunArgs),
    /// Detrapping time tau_c over a grid of chi values; write tau_c.csv.
    Sweep(SweepArgs),
    /// SP versus dSP/dt phase portrait; write portrait.csv.
    Portrait(RunArgs),
    /// Fit a power law to one column of a CSV and write the result as JSON.
    Fit(FitArgs),
    /// Plot CSV columns as a minimal SVG.
    Render(RenderArgs),
}

/// Flags override values from `--config`; unset flags keep the file's (or
/// the built-in) defaults.
#[derive(Args, Clone)]
struct RunArgs {
    /// JSON config file (run_meta.json from an earlier run works too).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Nonlinearity strength.
    #[arg(long)]
    chi: Option<f64>,
    /// Coin input: L, S, R, sigma_plus, sigma_minus_1, sigma_minus_2.
    #[arg(long)]
    input: Option<CoinBasis>,
    /// Starting site of the walker.
    #[arg(long, allow_hyphen_values = true)]
    start_position: Option<i64>,
    /// Number of steps [default: 10000].
    #[arg(long)]
    steps: Option<usize>,
    /// Density snapshot cadence in steps [default: 1000].
    #[arg(long)]
    record_every: Option<usize>,
    /// Keep every k-th phase-portrait point [default: 1].
    #[arg(long)]
    portrait_every: Option<usize>,
    /// Output directory [default: out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sliding-window width of the tau_c detector [default: 100].
    #[arg(long)]
    detrap_window: Option<usize>,
    /// Absolute slope floor of the tau_c detector, PR per step [default: 0.05].
    #[arg(long)]
    detrap_threshold: Option<f64>,
    /// Consecutive windows that must exceed the trigger [default: 50].
    #[arg(long)]
    detrap_sustain: Option<usize>,
    /// Trigger multiple of |baseline slope| [default: 5].
    #[arg(long)]
    detrap_multiplier: Option<f64>,
    /// Start of the power-law fit window [default: 1000].
    #[arg(long)]
    t_min: Option<u64>,
    /// End of the power-law fit window [default: last step].
    #[arg(long)]
    t_max: Option<u64>,
    /// Geometric bin growth ratio for fits [default: 1.2].
    #[arg(long)]
    bin_ratio: Option<f64>,
}

impl RunArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = self.chi {
            cfg.chi = v;
        }
        if let Some(v) = self.input {
            cfg.input = v;
        }
        if let Some(v) = self.start_position {
            cfg.start_position = v;
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = self.record_every {
            cfg.record_every = v;
        }
        if let Some(v) = self.portrait_every {
            cfg.portrait_every = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = self.detrap_window {
            cfg.detrap.window = v;
        }
        if let Some(v) = self.detrap_threshold {
            cfg.detrap.slope_threshold = v;
        }
        if let Some(v) = self.detrap_sustain {
            cfg.detrap.sustain = v;
        }
        if let Some(v) = self.detrap_multiplier {
            cfg.detrap.baseline_multiplier = v;
        }
        if let Some(v) = self.t_min {
            cfg.fit.t_min = v;
        }
        if let Some(v) = self.t_max {
            cfg.fit.t_max = Some(v);
        }
        if let Some(v) = self.bin_ratio {
            cfg.fit.bin_ratio = v;
        }
    }

    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg);
        Ok(cfg)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated chi values, strictly increasing.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["chi_min", "chi_max", "chi_count"])]
    chis: Option<Vec<f64>>,
    #[arg(long, requires_all = ["chi_max", "chi_count"])]
    chi_min: Option<f64>,
    #[arg(long)]
    chi_max: Option<f64>,
    #[arg(long)]
    chi_count: Option<usize>,
    /// Maximum concurrent runs; 0 uses every core.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write each point's sliding PR slopes to slopes_<k>.csv (k in chi order).
    #[arg(long)]
    dump_slopes: bool,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with a header row (and normally a `t` column).
    series_file: PathBuf,
    #[arg(long, default_value = "SP")]
    column: String,
    #[arg(long, default_value_t = 1000)]
    t_min: u64,
    /// Defaults to the last row.
    #[arg(long)]
    t_max: Option<u64>,
    #[arg(long, default_value_t = nlqw::analysis::DEFAULT_BIN_RATIO)]
    bin_ratio: f64,
    /// Report path [default: <stem>_<column>_fit.json next to the input].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    series_file: PathBuf,
    /// Y columns (comma-separated) [default: all but the x column].
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// X column [default: first column].
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    log_x: bool,
    #[arg(long)]
    log_y: bool,
    /// Both axes logarithmic.
    #[arg(long)]
    loglog: bool,
    /// Draw points instead of a polyline.
    #[arg(long)]
    scatter: bool,
    /// Output SVG [default: input path with .svg extension].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Evolve(args) => {
            let cfg = args.resolve()?;
            let rec = commands::cmd_evolve(&cfg)?;
            println!(
                "wrote {} steps to {} (SP(T) = {:.6e}, PR(T) = {:.3})",
                cfg.steps,
                cfg.output_dir.display(),
                rec.sp.values().last().unwrap(),
                rec.pr.values().last().unwrap()
            );
        }
        Command::Portrait(args) => {
            let cfg = args.resolve()?;
            let points = commands::cmd_portrait(&cfg)?;
            println!(
                "wrote {} portrait points to {}",
                points.len(),
                cfg.output_dir.display()
            );
        }
        Command::Sweep(args) => {
            let mut cfg: SweepConfig = match &args.run.config {
                Some(p) => load_json(p)?,
                None => SweepConfig::default(),
            };
            args.run.apply(&mut cfg.run);
            if let Some(v) = args.chis {
                cfg.chi_values = Some(v);
                cfg.grid = None;
            }
            if let (Some(min), Some(max), Some(count)) =
                (args.chi_min, args.chi_max, args.chi_count)
            {
                cfg.chi_values = None;
                cfg.grid = Some(ChiGrid { min, max, count });
            }
            if let Some(j) = args.jobs {
                cfg.jobs = j;
            }
            cfg.dump_slopes |= args.dump_slopes;
            let rows = commands::cmd_sweep(&cfg)?;
            for r in &rows {
                match &r.outcome {
                    Ok(d) => println!("chi = {:<8} tau_c = {:?}", r.chi, d.tau_c),
                    Err(e) => println!("chi = {:<8} error: {e}", r.chi),
                }
            }
        }
        Command::Fit(args) => {
            let (report, path) = commands::cmd_fit(
                &args.series_file,
                &args.column,
                args.t_min,
                args.t_max,
                args.bin_ratio,
                args.out.as_deref(),
            )?;
            let f = &report.fit;
            println!(
                "{} over [{}, {}]: exponent = {:.4} ± {:.4}, amplitude = {:.4e}, r² = {:.4} ({} bins) -> {}",
                report.column,
                f.window.0,
                f.window.1,
                f.exponent,
                f.stderr,
                f.amplitude,
                f.r_squared,
                f.bins,
                path.display()
            );
        }
        Command::Render(args) => {
            let out = args
                .out
                .clone()
                .unwrap_or_else(|| args.series_file.with_extension("svg"));
            let opts = RenderOptions {
                x: args.x,
                columns: args.columns,
                log_x: args.log_x || args.loglog,
                log_y: args.log_y || args.loglog,
                scatter: args.scatter,
            };
            commands::cmd_render(&args.series_file, &opts, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}
