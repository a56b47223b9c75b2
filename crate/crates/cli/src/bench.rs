//! Dataset benchmark harness: corrupt every image at every density with a
//! derived per-image seed, denoise with every method against one shared
//! noise realization, score against the clean original, and emit a CSV plus
//! per-(method, density) mean summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use seconv_core::baseline::{adaptive_median_filter, median_filter};
use seconv_core::image::Image;
use seconv_core::metrics::MetricReport;
use seconv_core::network::{forward, NetworkGraph};
use seconv_core::noise::{add_sap_noise, splitmix64, NoiseSpec};
use seconv_core::seconv::{cascade_denoise, CascadeSpec};
use thiserror::Error;

use crate::io::read_image;

pub const CSV_SCHEMA_COMMENT: &str = "# seconv bench csv v1";
pub const CSV_HEADER: &str = "image,method,density,psnr_db,ssim,mse,runtime_ms,seed";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("dataset directory {0:?} contains no readable images")]
    EmptyDataset(PathBuf),
    #[error("density {0} outside (0, 1]")]
    BadDensity(f64),
    #[error("no densities given")]
    NoDensities,
    #[error("no methods given")]
    NoMethods,
    #[error("method {0:?} requires --weights")]
    MissingWeights(String),
    #[error("denoise failed on {image} at density {density}: {message}")]
    Denoise { image: String, density: f64, message: String },
    #[error("metric failed on {image}: {message}")]
    Metric { image: String, message: String },
}

/// One denoising method under benchmark.
#[derive(Debug, Clone)]
pub enum Method {
    MedianFilter { window: usize },
    AdaptiveMedian { max_window: usize },
    Cascade(CascadeSpec),
    Network(Box<NetworkGraph>),
    /// Scores the corrupted image itself; the no-denoising baseline.
    Noisy,
}

impl Method {
    pub fn id(&self) -> &'static str {
        match self {
            Method::MedianFilter { .. } => "mf",
            Method::AdaptiveMedian { .. } => "amf",
            Method::Cascade(_) => "cascade",
            Method::Network(_) => "network",
            Method::Noisy => "noisy",
        }
    }

    fn run(&self, noisy: &Image) -> Result<Image, String> {
        match self {
            Method::MedianFilter { window } => {
                median_filter(noisy, *window).map_err(|e| e.to_string())
            }
            Method::AdaptiveMedian { max_window } => {
                adaptive_median_filter(noisy, *max_window).map_err(|e| e.to_string())
            }
            Method::Cascade(spec) => cascade_denoise(noisy, spec).map_err(|e| e.to_string()),
            Method::Network(graph) => forward(graph, noisy).map_err(|e| e.to_string()),
            Method::Noisy => Ok(noisy.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub dataset_dir: PathBuf,
    /// Noise densities as fractions in (0, 1].
    pub densities: Vec<f64>,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub output_csv: Option<PathBuf>,
    /// Thread count for row evaluation; 0 means the rayon default.
    pub threads: usize,
    /// Write runtime_ms as 0.000 so CSV output is byte-reproducible.
    pub zero_runtime: bool,
}

/// One (image, method, density) measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub image_id: String,
    pub method: &'static str,
    pub density: f64,
    pub report: MetricReport,
    pub seed: u64,
}

#[derive(Debug, Default)]
pub struct BenchOutcome {
    pub rows: Vec<BenchmarkRow>,
    /// Files skipped as unreadable, with the reason.
    pub warnings: Vec<String>,
}

/// Seed for one (image, density) cell, independent of the rest of the
/// dataset: a splitmix64 chain over the master seed, the image id bytes,
/// and the density in permille.
pub fn derive_seed(master: u64, image_id: &str, density: f64) -> u64 {
    let mut h = splitmix64(master);
    for b in image_id.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    let permille = (density * 1000.0).round() as u64;
    splitmix64(h ^ permille)
}

fn validate(config: &BenchmarkConfig) -> Result<(), BenchError> {
    if config.densities.is_empty() {
        return Err(BenchError::NoDensities);
    }
    if let Some(&d) = config.densities.iter().find(|&&d| !(d > 0.0 && d <= 1.0)) {
        return Err(BenchError::BadDensity(d));
    }
    if config.methods.is_empty() {
        return Err(BenchError::NoMethods);
    }
    Ok(())
}

fn list_dataset(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("pgm" | "ppm" | "png" | "PGM" | "PPM" | "PNG")
                )
        })
        .collect();
    files.sort();
    Ok(files)
}

fn image_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Runs the full grid. Rows come back sorted by (image, density, method id)
/// regardless of thread count.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchOutcome, BenchError> {
    validate(config)?;
    let files = list_dataset(&config.dataset_dir)?;
    let mut warnings = Vec::new();
    let mut images: Vec<(String, Image)> = Vec::new();
    for path in &files {
        match read_image(path) {
            Ok(img) => images.push((image_id(path), img)),
            Err(e) => warnings.push(format!("skipping {}: {e}", path.display())),
        }
    }
    if images.is_empty() {
        return Err(BenchError::EmptyDataset(config.dataset_dir.clone()));
    }

    let cells: Vec<(usize, f64)> = (0..images.len())
        .flat_map(|i| config.densities.iter().map(move |&d| (i, d)))
        .collect();

    let evaluate = |&(img_idx, density): &(usize, f64)| -> Result<Vec<BenchmarkRow>, BenchError> {
        let (id, clean) = &images[img_idx];
        let seed = derive_seed(config.seed, id, density);
        let spec = NoiseSpec::new(density, seed).map_err(|e| BenchError::Denoise {
            image: id.clone(),
            density,
            message: e.to_string(),
        })?;
        let noisy = add_sap_noise(clean, &spec).map_err(|e| BenchError::Denoise {
            image: id.clone(),
            density,
            message: e.to_string(),
        })?;
        let mut rows = Vec::with_capacity(config.methods.len());
        for method in &config.methods {
            let started = Instant::now();
            let denoised = method.run(&noisy.image).map_err(|message| BenchError::Denoise {
                image: id.clone(),
                density,
                message,
            })?;
            let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
            let runtime_ms = if config.zero_runtime { 0.0 } else { elapsed_ms };
            let report =
                MetricReport::measure(&denoised, clean, runtime_ms).map_err(|e| BenchError::Metric {
                    image: id.clone(),
                    message: e.to_string(),
                })?;
            rows.push(BenchmarkRow { image_id: id.clone(), method: method.id(), density, report, seed });
        }
        Ok(rows)
    };

    let nested: Result<Vec<Vec<BenchmarkRow>>, BenchError> = if config.threads == 1 {
        cells.iter().map(evaluate).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        pool.install(|| cells.par_iter().map(evaluate).collect())
    };
    let mut rows: Vec<BenchmarkRow> = nested?.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (&a.image_id, permille(a.density), a.method).cmp(&(&b.image_id, permille(b.density), b.method))
    });

    if let Some(path) = &config.output_csv {
        fs::write(path, render_csv(&rows))?;
    }
    Ok(BenchOutcome { rows, warnings })
}

fn permille(density: f64) -> u64 {
    (density * 1000.0).round() as u64
}

/// Fixed-format CSV: schema comment line, header, LF endings.
pub fn render_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_SCHEMA_COMMENT);
    out.push('\n');
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{:.2},{:.4},{:.6},{:.6},{:.3},{}",
            row.image_id,
            row.method,
            row.density,
            row.report.psnr_db,
            row.report.ssim,
            row.report.mse,
            row.report.runtime_ms,
            row.seed,
        );
    }
    out
}

/// Per-(method, density) means plus the mean-of-means column.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub methods: Vec<&'static str>,
    pub densities: Vec<f64>,
    /// psnr_means[m][d] for method m, density d.
    pub psnr_means: Vec<Vec<f64>>,
    pub ssim_means: Vec<Vec<f64>>,
    /// Arithmetic mean of the per-density means, per method.
    pub psnr_overall: Vec<f64>,
    pub ssim_overall: Vec<f64>,
}

pub fn summarize(rows: &[BenchmarkRow]) -> Summary {
    let mut methods: Vec<&'static str> = Vec::new();
    let mut densities: Vec<f64> = Vec::new();
    for row in rows {
        if !methods.contains(&row.method) {
            methods.push(row.method);
        }
        if !densities.iter().any(|&d| permille(d) == permille(row.density)) {
            densities.push(row.density);
        }
    }
    densities.sort_by(|a, b| a.partial_cmp(b).expect("finite densities"));

    let mut psnr_means = vec![vec![0.0; densities.len()]; methods.len()];
    let mut ssim_means = vec![vec![0.0; densities.len()]; methods.len()];
    for (m, &method) in methods.iter().enumerate() {
        for (d, &density) in densities.iter().enumerate() {
            let cell: Vec<&BenchmarkRow> = rows
                .iter()
                .filter(|r| r.method == method && permille(r.density) == permille(density))
                .collect();
            let n = cell.len() as f64;
            psnr_means[m][d] = cell.iter().map(|r| r.report.psnr_db).sum::<f64>() / n;
            ssim_means[m][d] = cell.iter().map(|r| r.report.ssim).sum::<f64>() / n;
        }
    }
    let psnr_overall =
        psnr_means.iter().map(|row| row.iter().sum::<f64>() / row.len() as f64).collect();
    let ssim_overall =
        ssim_means.iter().map(|row| row.iter().sum::<f64>() / row.len() as f64).collect();
    Summary { methods, densities, psnr_means, ssim_means, psnr_overall, ssim_overall }
}

/// Renders the summary in the familiar methods × densities table layout.
pub fn format_summary(summary: &Summary) -> String {
    let mut out = String::new();
    for (title, means, overall) in [
        ("PSNR (dB)", &summary.psnr_means, &summary.psnr_overall),
        ("SSIM", &summary.ssim_means, &summary.ssim_overall),
    ] {
        let _ = writeln!(out, "{title} means by noise density");
        let _ = write!(out, "{:<10}", "method");
        for d in &summary.densities {
            let _ = write!(out, "{:>9}", format!("{:.0}%", d * 100.0));
        }
        let _ = writeln!(out, "{:>9}", "Mean");
        for (m, method) in summary.methods.iter().enumerate() {
            let _ = write!(out, "{method:<10}");
            for v in &means[m] {
                let _ = write!(out, "{v:>9.3}");
            }
            let _ = writeln!(out, "{:>9.3}", overall[m]);
        }
        let _ = writeln!(out);
    }
    out
}
