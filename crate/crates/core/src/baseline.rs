//! Classical comparison denoisers: fixed-window median filter and the
//! window-growing adaptive median filter. Borders are edge-replicated so the
//! padding never injects artificial pepper.

use alloc::vec::Vec;
use core::fmt;

use crate::image::Image;
use crate::tensor::TensorError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MedianError {
    EvenWindow { window: usize },
    /// max_window must be odd and at least 3.
    BadMaxWindow { max_window: usize },
}

impl fmt::Display for MedianError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MedianError::EvenWindow { window } => write!(f, "median window must be odd, got {window}"),
            MedianError::BadMaxWindow { max_window } => {
                write!(f, "adaptive median max window must be odd and >= 3, got {max_window}")
            }
        }
    }
}

impl core::error::Error for MedianError {}

impl From<MedianError> for TensorError {
    fn from(e: MedianError) -> Self {
        match e {
            MedianError::EvenWindow { window } => TensorError::EvenKernel { size: window },
            MedianError::BadMaxWindow { max_window } => TensorError::EvenKernel { size: max_window },
        }
    }
}

/// Window bounds for the median baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MedianSpec {
    pub window: usize,
    pub max_window: usize,
}

impl Default for MedianSpec {
    fn default() -> Self {
        Self { window: 3, max_window: 15 }
    }
}

#[inline]
fn clamp_coord(v: isize, max: usize) -> usize {
    if v < 0 {
        0
    } else if v >= max as isize {
        max - 1
    } else {
        v as usize
    }
}

fn window_values(x: &Image, row: usize, col: usize, ch: usize, half: usize, buf: &mut Vec<f64>) {
    buf.clear();
    let (h, w, _) = x.shape();
    for di in -(half as isize)..=half as isize {
        let ii = clamp_coord(row as isize + di, h);
        for dj in -(half as isize)..=half as isize {
            let jj = clamp_coord(col as isize + dj, w);
            buf.push(x.get(ii, jj, ch));
        }
    }
}

fn median_of(buf: &mut [f64]) -> f64 {
    buf.sort_unstable_by(f64::total_cmp);
    buf[buf.len() / 2]
}

/// Replaces each pixel by the median of its window; channels independent.
pub fn median_filter(x: &Image, window: usize) -> Result<Image, MedianError> {
    if window.is_multiple_of(2) || window == 0 {
        return Err(MedianError::EvenWindow { window });
    }
    let (h, w, c) = x.shape();
    let half = window / 2;
    let mut out = x.clone();
    let mut buf = Vec::with_capacity(window * window);
    for i in 0..h {
        for j in 0..w {
            for ch in 0..c {
                window_values(x, i, j, ch, half, &mut buf);
                out.set(i, j, ch, median_of(&mut buf));
            }
        }
    }
    Ok(out)
}

/// Adaptive median filter specialised to SAP noise: pixels that are neither
/// 0 nor 255 pass through untouched; extreme pixels take the median of the
/// smallest window whose median is itself not extreme, growing to
/// `max_window` (whose median is used if growth is exhausted).
pub fn adaptive_median_filter(x: &Image, max_window: usize) -> Result<Image, MedianError> {
    if max_window.is_multiple_of(2) || max_window < 3 {
        return Err(MedianError::BadMaxWindow { max_window });
    }
    let (h, w, c) = x.shape();
    let mut out = x.clone();
    let mut buf = Vec::with_capacity(max_window * max_window);
    for i in 0..h {
        for j in 0..w {
            for ch in 0..c {
                let v = x.get(i, j, ch);
                if v != 0.0 && v != 255.0 {
                    continue;
                }
                let mut window = 3usize;
                let mut med;
                loop {
                    window_values(x, i, j, ch, window / 2, &mut buf);
                    med = median_of(&mut buf);
                    if (med != 0.0 && med != 255.0) || window >= max_window {
                        break;
                    }
                    window += 2;
                }
                out.set(i, j, ch, med);
            }
        }
    }
    Ok(out)
}
