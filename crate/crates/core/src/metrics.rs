//! Image quality metrics: MSE, PSNR against the fixed 255 peak, SSIM with
//! global or Gaussian-windowed statistics, and the batch squared-error loss.

use alloc::vec::Vec;
use core::fmt;

use crate::image::{Image, Scale};
use crate::tensor::Shape;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricError {
    ShapeMismatch { left: Shape, right: Shape },
    /// PSNR and SAP-domain comparisons assume the u8 intensity scale.
    ScaleMismatch,
    EmptyBatch,
    /// Windowed SSIM needs the window to fit inside the image.
    WindowTooLarge { window: usize, height: usize, width: usize },
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::ShapeMismatch { left, right } => {
                write!(f, "shape mismatch: {left:?} vs {right:?}")
            }
            MetricError::ScaleMismatch => write!(f, "images must share the u8 scale"),
            MetricError::EmptyBatch => write!(f, "empty batch"),
            MetricError::WindowTooLarge { window, height, width } => {
                write!(f, "SSIM window {window} exceeds image {height}x{width}")
            }
        }
    }
}

impl core::error::Error for MetricError {}

fn check_pair(a: &Image, b: &Image) -> Result<(), MetricError> {
    if a.shape() != b.shape() {
        return Err(MetricError::ShapeMismatch { left: a.shape(), right: b.shape() });
    }
    if a.scale() != b.scale() {
        return Err(MetricError::ScaleMismatch);
    }
    Ok(())
}

/// Mean square error over all channels and pixels.
pub fn mse(xhat: &Image, y: &Image) -> Result<f64, MetricError> {
    check_pair(xhat, y)?;
    let n = xhat.data().len() as f64;
    let sum: f64 = xhat
        .data()
        .iter()
        .zip(y.data())
        .map(|(&a, &b)| {
            let d = a - b;
            d * d
        })
        .sum();
    Ok(sum / n)
}

/// Peak signal-to-noise ratio in dB with the peak fixed at 255; +infinity
/// when the images are identical.
pub fn psnr(xhat: &Image, y: &Image) -> Result<f64, MetricError> {
    if xhat.scale() != Scale::U8 || y.scale() != Scale::U8 {
        return Err(MetricError::ScaleMismatch);
    }
    let m = mse(xhat, y)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * libm::log10(255.0 * 255.0 / m))
}

/// Statistics mode for [`ssim`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SsimMode {
    /// Single mean/variance/covariance over the whole image.
    Global,
    /// Gaussian-weighted local statistics averaged over valid windows.
    Windowed { window: usize, sigma: f64 },
}

/// Structural-similarity parameters; c1 = (k1·L)², c2 = (k2·L)².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    pub k1: f64,
    pub k2: f64,
    pub l: f64,
    pub mode: SsimMode,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self { k1: 0.01, k2: 0.03, l: 255.0, mode: SsimMode::Global }
    }
}

impl SsimParams {
    /// The common published variant: 11×11 windows, sigma 1.5.
    pub fn windowed() -> Self {
        Self { mode: SsimMode::Windowed { window: 11, sigma: 1.5 }, ..Self::default() }
    }

    pub fn c1(&self) -> f64 {
        (self.k1 * self.l) * (self.k1 * self.l)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.l) * (self.k2 * self.l)
    }
}

/// Structural similarity index. Color images are scored per channel and the
/// channel scores averaged.
pub fn ssim(xhat: &Image, y: &Image, params: &SsimParams) -> Result<f64, MetricError> {
    check_pair(xhat, y)?;
    let (h, w, c) = xhat.shape();
    let mut total = 0.0;
    for ch in 0..c {
        total += match params.mode {
            SsimMode::Global => ssim_global_channel(xhat, y, ch, params),
            SsimMode::Windowed { window, sigma } => {
                if window > h || window > w {
                    return Err(MetricError::WindowTooLarge { window, height: h, width: w });
                }
                ssim_windowed_channel(xhat, y, ch, window, sigma, params)
            }
        };
    }
    Ok(total / c as f64)
}

fn ssim_formula(mx: f64, my: f64, vx: f64, vy: f64, cov: f64, c1: f64, c2: f64) -> f64 {
    ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
}

fn ssim_global_channel(xhat: &Image, y: &Image, ch: usize, params: &SsimParams) -> f64 {
    let (h, w, _) = xhat.shape();
    let n = (h * w) as f64;
    let mut sx = 0.0;
    let mut sy = 0.0;
    for i in 0..h {
        for j in 0..w {
            sx += xhat.get(i, j, ch);
            sy += y.get(i, j, ch);
        }
    }
    let mx = sx / n;
    let my = sy / n;
    let mut vx = 0.0;
    let mut vy = 0.0;
    let mut cov = 0.0;
    for i in 0..h {
        for j in 0..w {
            let dx = xhat.get(i, j, ch) - mx;
            let dy = y.get(i, j, ch) - my;
            vx += dx * dx;
            vy += dy * dy;
            cov += dx * dy;
        }
    }
    // population statistics
    vx /= n;
    vy /= n;
    cov /= n;
    ssim_formula(mx, my, vx, vy, cov, params.c1(), params.c2())
}

fn gaussian_weights(window: usize, sigma: f64) -> Vec<f64> {
    let r = (window / 2) as isize;
    let mut w = Vec::with_capacity(window * window);
    let mut total = 0.0;
    for u in -r..=r {
        for v in -r..=r {
            let g = libm::exp(-((u * u + v * v) as f64) / (2.0 * sigma * sigma));
            w.push(g);
            total += g;
        }
    }
    for g in &mut w {
        *g /= total;
    }
    w
}

fn ssim_windowed_channel(
    xhat: &Image,
    y: &Image,
    ch: usize,
    window: usize,
    sigma: f64,
    params: &SsimParams,
) -> f64 {
    let (h, w, _) = xhat.shape();
    let weights = gaussian_weights(window, sigma);
    let (c1, c2) = (params.c1(), params.c2());
    let mut total = 0.0;
    let mut count = 0usize;
    for i0 in 0..=(h - window) {
        for j0 in 0..=(w - window) {
            let mut mx = 0.0;
            let mut my = 0.0;
            for u in 0..window {
                for v in 0..window {
                    let g = weights[u * window + v];
                    mx += g * xhat.get(i0 + u, j0 + v, ch);
                    my += g * y.get(i0 + u, j0 + v, ch);
                }
            }
            let mut vx = 0.0;
            let mut vy = 0.0;
            let mut cov = 0.0;
            for u in 0..window {
                for v in 0..window {
                    let g = weights[u * window + v];
                    let dx = xhat.get(i0 + u, j0 + v, ch) - mx;
                    let dy = y.get(i0 + u, j0 + v, ch) - my;
                    vx += g * dx * dx;
                    vy += g * dy * dy;
                    cov += g * dx * dy;
                }
            }
            total += ssim_formula(mx, my, vx, vy, cov, c1, c2);
            count += 1;
        }
    }
    total / count as f64
}

/// Batch squared-error loss: (1/2P) Σ ‖pred − target‖².
pub fn training_loss(preds: &[Image], targets: &[Image]) -> Result<f64, MetricError> {
    if preds.is_empty() || preds.len() != targets.len() {
        return Err(MetricError::EmptyBatch);
    }
    let mut total = 0.0;
    for (p, t) in preds.iter().zip(targets) {
        if p.shape() != t.shape() {
            return Err(MetricError::ShapeMismatch { left: p.shape(), right: t.shape() });
        }
        total += p
            .data()
            .iter()
            .zip(t.data())
            .map(|(&a, &b)| {
                let d = a - b;
                d * d
            })
            .sum::<f64>();
    }
    Ok(total / (2.0 * preds.len() as f64))
}

/// Scores for one denoised/reference pair, plus the denoise wall time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub psnr_db: f64,
    pub ssim: f64,
    pub mse: f64,
    pub runtime_ms: f64,
}

impl MetricReport {
    pub fn measure(xhat: &Image, y: &Image, runtime_ms: f64) -> Result<Self, MetricError> {
        Ok(Self {
            psnr_db: psnr(xhat, y)?,
            ssim: ssim(xhat, y, &SsimParams::default())?,
            mse: mse(xhat, y)?,
            runtime_ms,
        })
    }
}
