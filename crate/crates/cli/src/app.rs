//! Command implementations behind the `seconv` binary.
//!
//! Exit codes: 0 success, 1 validation (bad flags, incompatible inputs),
//! 2 I/O (missing, unreadable, or malformed files).

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use seconv_core::metrics::{mse, psnr, ssim, SsimParams};
use seconv_core::noise::{add_sap_noise, NoiseSpec};
use seconv_core::seconv::{cascade_denoise_report, CascadeSpec};
use seconv_core::{baseline, network};

use crate::bench::{
    format_summary, run_benchmark, summarize, BenchError, BenchmarkConfig, Method,
};
use crate::chart::render_summary_svg;
use crate::config::{load_cascade_config, ConfigError};
use crate::io::{read_image, write_image, IoFormatError};
use crate::scvw::{load_weights, ScvwError};

#[derive(Debug)]
pub enum AppError {
    Validation(String),
    Io(String),
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Validation(_) => 1,
            AppError::Io(_) => 2,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Validation(m) | AppError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<IoFormatError> for AppError {
    fn from(e: IoFormatError) -> Self {
        AppError::Io(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

impl From<ScvwError> for AppError {
    fn from(e: ScvwError) -> Self {
        AppError::Io(e.to_string())
    }
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(io) => AppError::Io(io.to_string()),
            other => AppError::Validation(other.to_string()),
        }
    }
}

impl From<BenchError> for AppError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Io(_) | BenchError::EmptyDataset(_) => AppError::Io(e.to_string()),
            other => AppError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "seconv", version, about = "Salt-and-pepper image denoising toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corrupt an image with salt-and-pepper noise.
    AddNoise(AddNoiseArgs),
    /// Denoise an image with one of the built-in methods.
    Denoise(DenoiseArgs),
    /// Score a denoised image against its clean reference.
    Eval(EvalArgs),
    /// Run the dataset benchmark grid and emit CSV plus a summary table.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct AddNoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Noise density as a fraction in [0, 1].
    #[arg(long)]
    pub density: f64,
    /// Salt probability override; defaults to density/2.
    #[arg(long)]
    pub salt_prob: Option<f64>,
    /// Pepper probability override; defaults to density/2.
    #[arg(long)]
    pub pepper_prob: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// One of: mf, amf, cascade, network.
    #[arg(long)]
    pub method: String,
    /// Window side for --method mf.
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    /// Window growth bound for --method amf.
    #[arg(long, default_value_t = 15)]
    pub max_window: usize,
    /// Cascade configuration file for --method cascade.
    #[arg(long)]
    pub cascade_config: Option<PathBuf>,
    /// SCVW weight container for --method network.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub denoised: PathBuf,
    #[arg(long)]
    pub reference: PathBuf,
    /// SSIM statistics: global or windowed.
    #[arg(long, default_value = "global")]
    pub ssim_mode: String,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub dataset_dir: PathBuf,
    /// Comma-separated noise densities as percentages.
    #[arg(long, default_value = "10,20,30,40,50,60,70,80,90,95")]
    pub densities: String,
    /// Comma-separated method ids from: cascade, mf, amf, network, noisy.
    #[arg(long, default_value = "cascade,mf,amf")]
    pub methods: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output_csv: PathBuf,
    /// SCVW weight container; required when methods include network.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Worker threads for the benchmark grid; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Optional SVG chart of the summary.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Write runtime_ms as 0.000 so the CSV is byte-reproducible.
    #[arg(long, default_value_t = false)]
    pub zero_runtime: bool,
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    #[arg(long, default_value_t = 15)]
    pub max_window: usize,
    #[arg(long)]
    pub cascade_config: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::AddNoise(args) => cmd_add_noise(args),
        Command::Denoise(args) => cmd_denoise(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn cmd_add_noise(args: AddNoiseArgs) -> Result<(), AppError> {
    let spec = match (args.salt_prob, args.pepper_prob) {
        (None, None) => NoiseSpec::new(args.density, args.seed),
        (salt, pepper) => NoiseSpec::with_split(
            salt.unwrap_or(args.density / 2.0),
            pepper.unwrap_or(args.density / 2.0),
            args.seed,
        ),
    }
    .map_err(|e| AppError::Validation(e.to_string()))?;
    let image = read_image(&args.input)?;
    let noisy = add_sap_noise(&image, &spec).map_err(|e| AppError::Validation(e.to_string()))?;
    write_image(&args.output, &noisy.image)?;
    let total = image.data().len();
    println!(
        "corrupted {} of {total} pixels (fraction {:.4})",
        noisy.corrupted_count(),
        noisy.corrupted_count() as f64 / total as f64
    );
    Ok(())
}

fn cascade_spec_from(path: Option<&PathBuf>) -> Result<CascadeSpec, AppError> {
    match path {
        Some(p) => Ok(load_cascade_config(p)?),
        None => Ok(CascadeSpec::standard()),
    }
}

fn cmd_denoise(args: DenoiseArgs) -> Result<(), AppError> {
    let input = read_image(&args.input)?;
    let output = match args.method.as_str() {
        "mf" => baseline::median_filter(&input, args.window)
            .map_err(|e| AppError::Validation(e.to_string()))?,
        "amf" => baseline::adaptive_median_filter(&input, args.max_window)
            .map_err(|e| AppError::Validation(e.to_string()))?,
        "cascade" => {
            let spec = cascade_spec_from(args.cascade_config.as_ref())?;
            let (image, run) = cascade_denoise_report(&input, &spec)
                .map_err(|e| AppError::Validation(e.to_string()))?;
            for (size, restored) in &run.block_restored {
                println!("block {size}x{size}: restored {restored}");
            }
            if run.extra_passes > 0 {
                println!("extra passes: {} (restored {})", run.extra_passes, run.extra_restored);
            }
            if run.mean_filled > 0 {
                println!("mean fill: {}", run.mean_filled);
            }
            if run.remaining_noisy > 0 {
                println!("remaining noisy: {}", run.remaining_noisy);
            }
            image
        }
        "network" => {
            let weights = args.weights.as_ref().ok_or_else(|| {
                AppError::Validation("--method network requires --weights".into())
            })?;
            let graph = load_weights(weights)?;
            network::forward(&graph, &input).map_err(|e| AppError::Validation(e.to_string()))?
        }
        other => {
            return Err(AppError::Validation(format!(
                "unknown method {other:?}; expected one of mf, amf, cascade, network"
            )))
        }
    };
    write_image(&args.output, &output)?;
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), AppError> {
    let denoised = read_image(&args.denoised)?;
    let reference = read_image(&args.reference)?;
    let params = match args.ssim_mode.as_str() {
        "global" => SsimParams::default(),
        "windowed" => SsimParams::windowed(),
        other => {
            return Err(AppError::Validation(format!(
                "unknown ssim mode {other:?}; expected global or windowed"
            )))
        }
    };
    let p = psnr(&denoised, &reference).map_err(|e| AppError::Validation(e.to_string()))?;
    let s = ssim(&denoised, &reference, &params).map_err(|e| AppError::Validation(e.to_string()))?;
    let m = mse(&denoised, &reference).map_err(|e| AppError::Validation(e.to_string()))?;
    println!("PSNR: {p:.2}");
    println!("SSIM: {s:.3}");
    println!("MSE: {m:.4}");
    Ok(())
}

fn parse_densities(spec: &str) -> Result<Vec<f64>, AppError> {
    spec.split(',')
        .map(|tok| {
            let pct: f64 = tok
                .trim()
                .parse()
                .map_err(|_| AppError::Validation(format!("bad density {tok:?}")))?;
            if pct <= 0.0 || pct > 100.0 {
                return Err(AppError::Validation(format!(
                    "density {pct}% outside (0, 100]"
                )));
            }
            Ok(pct / 100.0)
        })
        .collect()
}

fn parse_methods(args: &BenchArgs) -> Result<Vec<Method>, AppError> {
    args.methods
        .split(',')
        .map(|tok| match tok.trim() {
            "mf" => Ok(Method::MedianFilter { window: args.window }),
            "amf" => Ok(Method::AdaptiveMedian { max_window: args.max_window }),
            "cascade" => Ok(Method::Cascade(cascade_spec_from(args.cascade_config.as_ref())?)),
            "noisy" => Ok(Method::Noisy),
            "network" => {
                let weights = args.weights.as_ref().ok_or_else(|| {
                    AppError::Validation("method network requires --weights".into())
                })?;
                Ok(Method::Network(Box::new(load_weights(weights)?)))
            }
            other => Err(AppError::Validation(format!(
                "unknown method {other:?}; expected one of mf, amf, cascade, network, noisy"
            ))),
        })
        .collect()
}

fn cmd_bench(args: BenchArgs) -> Result<(), AppError> {
    let config = BenchmarkConfig {
        dataset_dir: args.dataset_dir.clone(),
        densities: parse_densities(&args.densities)?,
        methods: parse_methods(&args)?,
        seed: args.seed,
        output_csv: Some(args.output_csv.clone()),
        threads: args.threads,
        zero_runtime: args.zero_runtime,
    };
    let outcome = run_benchmark(&config)?;
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }
    let summary = summarize(&outcome.rows);
    print!("{}", format_summary(&summary));
    println!("wrote {} rows to {}", outcome.rows.len(), args.output_csv.display());
    if let Some(plot) = &args.plot {
        fs::write(plot, render_summary_svg(&summary))?;
        println!("wrote chart to {}", plot.display());
    }
    Ok(())
}
