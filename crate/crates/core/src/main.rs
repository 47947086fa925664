use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use trimmed_nw::cli_io::{self, DatasetSpec, OutputFormat, RunReport};
use trimmed_nw::simulation::{self, BootstrapConfig, BreakdownProbe, Placement, RegressionScenario, WindowPolicy};
use trimmed_nw::{
    order_pairs, BandwidthRule, CovariateLaw, Error, ErrorLaw, KernelKind, KernelSpec, OrderStatContext, PairedSample,
    Result,
};

/// Trimmed Nadaraya-Watson regression toolkit.
#[derive(Parser, Debug)]
#[command(name = "trimmed-nw", version, about)]
struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, default_value = "epanechnikov")]
    kernel: KernelKind,

    /// Kernel support half-width.
    #[arg(long, global = true, default_value_t = 1.0)]
    support: f64,

    /// `auto` (n^{-1/2}/2) or a positive bandwidth.
    #[arg(long, global = true, default_value = "auto")]
    bandwidth: BandwidthRule,

    /// json or csv; defaults to csv, or json for `breakdown`.
    #[arg(long, global = true)]
    output: Option<OutputFormat>,

    #[arg(long, global = true)]
    out_file: Option<PathBuf>,

    /// Record the wall-clock time in the report (breaks byte-reproducibility).
    #[arg(long, global = true)]
    stamp: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the estimator at one query point or over a grid.
    Estimate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 0.5)]
        x0: f64,
        #[arg(long)]
        alpha: f64,
        /// `lo:hi:points`; overrides --x0.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Asymptotic efficiency against the trimming proportion.
    AeCurve {
        #[arg(long, default_value = "uniform")]
        covariate: CovariateLaw,
        #[arg(long, default_value_t = 0.5)]
        x0: f64,
        #[arg(long, default_value = "0:0.45:0.01")]
        alphas: String,
        /// Sample size used in the order-statistic approximation.
        #[arg(long, default_value_t = 50)]
        approx_n: usize,
    },
    /// Monte-Carlo variance ratio for one of the four regression models.
    McEfficiency {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        example: u8,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 0.5)]
        x0: f64,
        #[arg(long, default_value = "0.05:0.45:0.05")]
        alphas: String,
        /// Override the model's covariate law.
        #[arg(long)]
        covariate: Option<CovariateLaw>,
        /// Override the model's error law.
        #[arg(long)]
        error: Option<ErrorLaw>,
        #[arg(long, value_enum, default_value = "abort")]
        on_empty_window: WindowArg,
    },
    /// Bootstrap variance ratio on a dataset.
    BootstrapEfficiency {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 1000)]
        resamples: usize,
        #[arg(long, default_value_t = 0.5)]
        x0: f64,
        #[arg(long, default_value = "0.05:0.45:0.05")]
        alphas: String,
    },
    /// Smallest contamination that breaks the estimator.
    Breakdown {
        #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
        input: Option<PathBuf>,
        /// Use a seeded sample from the linear model instead of a file.
        #[arg(long)]
        synthetic: bool,
        /// Size of the synthetic sample.
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value = "x")]
        x_column: String,
        #[arg(long, default_value = "y")]
        y_column: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        x0: f64,
        #[arg(long, default_value_t = 1e9)]
        magnitude: f64,
        #[arg(long, default_value_t = 1e2)]
        threshold: f64,
        #[arg(long, default_value = "upper-tail")]
        placement: Placement,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum WindowArg {
    Abort,
    Skip,
}

#[derive(Args, Debug)]
struct DataArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "x")]
    x_column: String,
    #[arg(long, default_value = "y")]
    y_column: String,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Min-max scale the covariate to [0, 1].
    #[arg(long)]
    scale_x: bool,
    /// Drop rows where either column equals this value.
    #[arg(long, allow_hyphen_values = true)]
    na_sentinel: Option<f64>,
}

impl DataArgs {
    fn load(&self, report: &mut RunReport) -> Result<PairedSample> {
        if !self.delimiter.is_ascii() {
            return Err(Error::InvalidParameter("delimiter must be a single ASCII character".into()));
        }
        let spec = DatasetSpec {
            path: self.input.clone(),
            x_column: self.x_column.clone(),
            y_column: self.y_column.clone(),
            scale_x: self.scale_x,
            delimiter: self.delimiter as u8,
            na_sentinel: self.na_sentinel,
        };
        let loaded = cli_io::load_csv(&spec)?;
        report
            .param("input", self.input.display().to_string())
            .param("x_column", &self.x_column)
            .param("y_column", &self.y_column)
            .param("scale_x", self.scale_x)
            .param("na_sentinel", self.na_sentinel)
            .extra("rows_used", loaded.sample.len())
            .extra("rows_dropped", loaded.dropped);
        Ok(loaded.sample)
    }
}

fn unix_timestamp() -> String {
    let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("unix:{secs}")
}

fn write_out(cli: &Cli, bytes: &[u8]) -> Result<()> {
    match &cli.out_file {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let kernel = KernelSpec::new(cli.kernel, cli.support)?;
    let mut default_format = OutputFormat::Csv;
    let mut report = match &cli.command {
        Command::Estimate { data, x0, alpha, grid } => {
            let mut r = RunReport::new("estimate", &["x0", "alpha", "estimate", "n_retained", "denominator_mass"]);
            let sample = data.load(&mut r)?;
            let h = cli.bandwidth.bandwidth(sample.len())?;
            let points = match grid {
                Some(g) => cli_io::parse_query_grid(g)?,
                None => vec![*x0],
            };
            let ordered = order_pairs(&sample);
            let estimates: Vec<_> =
                points.par_iter().map(|&x| ordered.trimmed_nw(x, *alpha, &kernel, h)).collect::<Result<_>>()?;
            for e in estimates {
                r.push_row(&[e.query_x, e.alpha, e.value, e.n_retained as f64, e.denominator_mass]);
            }
            r.param("alpha", alpha).param("grid", grid).param("bandwidth", h);
            r
        }
        Command::AeCurve { covariate, x0, alphas, approx_n } => {
            let mut r = RunReport::new("ae-curve", &["alpha", "ae"]);
            let curve =
                OrderStatContext::new(*covariate, *approx_n)?.ae_curve(&cli_io::parse_alpha_grid(alphas)?, *x0)?;
            for (a, v) in curve.alphas.iter().zip(&curve.values) {
                r.push_row(&[*a, *v]);
            }
            r.param("covariate", covariate.name()).param("x0", x0).param("approx_n", approx_n);
            r
        }
        Command::McEfficiency { example, n, reps, x0, alphas, covariate, error, on_empty_window } => {
            let base = RegressionScenario::example(*example, *n, cli.seed)?;
            let sc = RegressionScenario {
                replications: *reps,
                x0: *x0,
                alphas: cli_io::parse_alpha_grid(alphas)?,
                covariate: covariate.unwrap_or(base.covariate),
                error: error.unwrap_or(base.error),
                kernel,
                bandwidth: cli.bandwidth,
                on_empty_window: match on_empty_window {
                    WindowArg::Abort => WindowPolicy::Abort,
                    WindowArg::Skip => WindowPolicy::Skip,
                },
                ..base
            };
            let eff = simulation::run_mc_efficiency(&sc)?;
            let mut r = RunReport::new("mc-efficiency", &["alpha", "efficiency"]);
            for row in &eff.rows {
                r.push_row(&[row.alpha, row.efficiency]);
            }
            r.param("example", example).param("n", n).param("reps", reps).param("x0", x0);
            r.extra("efficiency", &eff);
            r
        }
        Command::BootstrapEfficiency { data, resamples, x0, alphas } => {
            let mut r = RunReport::new("bootstrap-efficiency", &["alpha", "efficiency"]);
            let sample = data.load(&mut r)?;
            let cfg = BootstrapConfig {
                resamples: *resamples,
                alphas: cli_io::parse_alpha_grid(alphas)?,
                x0: *x0,
                kernel,
                bandwidth: cli.bandwidth,
                seed: cli.seed,
            };
            let eff = simulation::run_bootstrap_efficiency(&sample, &cfg)?;
            for row in &eff.rows {
                r.push_row(&[row.alpha, row.efficiency]);
            }
            r.param("resamples", resamples).param("x0", x0);
            r.extra("efficiency", &eff);
            r
        }
        Command::Breakdown { input, synthetic, n, x_column, y_column, alpha, x0, magnitude, threshold, placement } => {
            default_format = OutputFormat::Json;
            let mut r = RunReport::new("breakdown", &["m", "bias", "defined"]);
            let sample = match input {
                Some(path) => {
                    r.param("input", path.display().to_string());
                    cli_io::load_csv(&DatasetSpec::new(path, x_column, y_column))?.sample
                }
                None => {
                    debug_assert!(*synthetic);
                    r.param("synthetic_n", n);
                    simulation::synthetic_sample(*n, cli.seed)?
                }
            };
            let probe = BreakdownProbe { magnitude: *magnitude, threshold: *threshold, placement: *placement };
            let b = simulation::empirical_breakdown_point(&sample, *x0, *alpha, &kernel, &cli.bandwidth, &probe)?;
            for p in &b.bias_curve {
                r.push_row(&[p.m as f64, p.bias.unwrap_or(0.0), if p.bias.is_some() { 1.0 } else { 0.0 }]);
            }
            r.param("alpha", alpha).param("x0", x0).param("magnitude", magnitude).param("threshold", threshold);
            r.param("placement", placement);
            r.extra("m_star", b.m_star).extra("ratio", b.ratio).extra("bias_curve", &b.bias_curve);
            r
        }
    };

    report.seed = Some(cli.seed);
    report.param("kernel", kernel).param("bandwidth_rule", cli.bandwidth.to_string());
    if cli.stamp {
        report.timestamp = Some(unix_timestamp());
    }
    let format = cli.output.unwrap_or(default_format);
    write_out(cli, &cli_io::emit_report(&report, format)?)?;

    // A CSV table drops the metadata; keep it next to the table.
    if format == OutputFormat::Csv && !report.extra.is_empty() {
        let meta = serde_json::to_vec_pretty(&json!({
            "command": report.command,
            "version": report.version,
            "seed": report.seed,
            "timestamp": report.timestamp,
            "parameters": report.parameters,
            "metadata": report.extra,
        }))?;
        match &cli.out_file {
            Some(p) => {
                let mut side = p.clone().into_os_string();
                side.push(".meta.json");
                std::fs::write(PathBuf::from(side), meta)?;
            }
            None => eprintln!("{}", String::from_utf8_lossy(&meta)),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
