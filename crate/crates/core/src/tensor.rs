//! Row-major H×W×C float tensor and the elementwise/convolution algebra
//! shared by every other module.
//!
//! Intermediate values are deliberately unclamped; range enforcement happens
//! only when an [`crate::image::Image`] is serialized.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Shape of a tensor as (height, width, channels).
pub type Shape = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TensorError {
    /// Operands of an elementwise operation have different shapes.
    ShapeMismatch { left: Shape, right: Shape },
    /// Convolution kernels must have odd side length.
    EvenKernel { size: usize },
    /// Kernel data length does not match the declared side length.
    KernelLength { size: usize, len: usize },
    /// Zero-sized dimensions are not permitted.
    EmptyShape { shape: Shape },
}

impl fmt::Display for TensorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorError::ShapeMismatch { left, right } => {
                write!(f, "shape mismatch: {left:?} vs {right:?}")
            }
            TensorError::EvenKernel { size } => {
                write!(f, "kernel side must be odd, got {size}")
            }
            TensorError::KernelLength { size, len } => {
                write!(f, "kernel of side {size} needs {} values, got {len}", size * size)
            }
            TensorError::EmptyShape { shape } => write!(f, "empty tensor shape {shape:?}"),
        }
    }
}

impl core::error::Error for TensorError {}

/// Channel handling for [`conv2d_same`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvMode {
    /// Each channel is convolved independently with the same 2-D kernel.
    PerChannel,
    /// Every output channel receives the sum over all input channels of the
    /// 2-D convolution (the kernel replicated across channel offsets).
    SumChannels,
}

/// Dense H×W×C tensor of f64 values, row-major with channels innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self, TensorError> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(TensorError::EmptyShape { shape: (height, width, channels) });
        }
        let expected = height * width * channels;
        if data.len() != expected {
            return Err(TensorError::ShapeMismatch {
                left: (height, width, channels),
                right: (data.len(), 1, 1),
            });
        }
        Ok(Self { height, width, channels, data })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Self { height, width, channels, data: vec![0.0; height * width * channels] }
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Self {
        Self { height, width, channels, data: vec![value; height * width * channels] }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn shape(&self) -> Shape {
        (self.height, self.width, self.channels)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize, ch: usize) -> usize {
        (row * self.width + col) * self.channels + ch
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[self.index(row, col, ch)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, ch: usize, value: f64) {
        let i = self.index(row, col, ch);
        self.data[i] = value;
    }

    /// Elementwise map into a new tensor.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            height: self.height,
            width: self.width,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> Tensor {
        self.map(|v| v * factor)
    }
}

/// Elementwise (Hadamard) product of two same-shaped tensors.
pub fn hadamard(a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
    if a.shape() != b.shape() {
        return Err(TensorError::ShapeMismatch { left: a.shape(), right: b.shape() });
    }
    let data = a.data.iter().zip(&b.data).map(|(&x, &y)| x * y).collect();
    Ok(Tensor { height: a.height, width: a.width, channels: a.channels, data })
}

/// Elementwise sum of two same-shaped tensors.
pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
    if a.shape() != b.shape() {
        return Err(TensorError::ShapeMismatch { left: a.shape(), right: b.shape() });
    }
    let data = a.data.iter().zip(&b.data).map(|(&x, &y)| x + y).collect();
    Ok(Tensor { height: a.height, width: a.width, channels: a.channels, data })
}

/// Square 2-D convolution kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self, TensorError> {
        if size.is_multiple_of(2) || size == 0 {
            return Err(TensorError::EvenKernel { size });
        }
        if weights.len() != size * size {
            return Err(TensorError::KernelLength { size, len: weights.len() });
        }
        Ok(Self { size, weights })
    }

    /// All-ones kernel of odd side `size`.
    pub fn ones(size: usize) -> Result<Self, TensorError> {
        Self::new(size, vec![1.0; size * size])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.size + col]
    }

    /// Kernel rotated by 180 degrees (true-convolution flip).
    pub fn flipped(&self) -> Kernel {
        let mut w = self.weights.clone();
        w.reverse();
        Kernel { size: self.size, weights: w }
    }
}

/// Stride-1 "same" 2-D convolution with zero padding of (s-1)/2 per side.
///
/// This is true convolution: the kernel is applied flipped, matching the
/// index arithmetic of a discrete convolution sum. Feed a pre-flipped kernel
/// (or [`Kernel::flipped`]) to get cross-correlation.
pub fn conv2d_same(x: &Tensor, kernel: &Kernel, mode: ConvMode) -> Tensor {
    let per_channel = conv2d_per_channel(x, kernel);
    match mode {
        ConvMode::PerChannel => per_channel,
        ConvMode::SumChannels => broadcast_channel_sum(&per_channel),
    }
}

// out[i,j,ch] = sum_{u,v} x[i + r - u, j + r - v, ch] * k[u,v]
//
// Each (u,v) kernel tap is one shifted multiply-add over a whole row, which
// keeps the hot loop branch-free and lets it vectorize; out-of-image taps
// are skipped entirely, which is exactly the zero-padding contribution.
fn conv2d_per_channel(x: &Tensor, kernel: &Kernel) -> Tensor {
    let (h, w, c) = x.shape();
    let s = kernel.size;
    let r = (s / 2) as isize;
    let mut out = Tensor::zeros(h, w, c);
    let row_len = w * c;

    for i in 0..h {
        let out_row = &mut out.data[i * row_len..(i + 1) * row_len];
        for u in 0..s {
            let ii = i as isize + r - u as isize;
            if ii < 0 || ii >= h as isize {
                continue;
            }
            let x_row = &x.data[(ii as usize) * row_len..(ii as usize + 1) * row_len];
            for v in 0..s {
                let kv = kernel.weights[u * s + v];
                if kv == 0.0 {
                    continue;
                }
                // source column jj = j + shift must stay inside [0, w)
                let shift = r - v as isize;
                let j_lo_i = (-shift).max(0);
                let j_hi_i = (w as isize).min(w as isize - shift);
                if j_lo_i >= j_hi_i {
                    continue;
                }
                let (j_lo, j_hi) = (j_lo_i as usize, j_hi_i as usize);
                let (a0, a1) = (j_lo * c, j_hi * c);
                let src0 = (j_lo as isize + shift) as usize * c;
                let src = &x_row[src0..src0 + (a1 - a0)];
                for (acc, &xv) in out_row[a0..a1].iter_mut().zip(src) {
                    *acc += kv * xv;
                }
            }
        }
    }
    out
}

fn broadcast_channel_sum(t: &Tensor) -> Tensor {
    let (h, w, c) = t.shape();
    let mut out = Tensor::zeros(h, w, c);
    for px in 0..h * w {
        let base = px * c;
        let total: f64 = t.data[base..base + c].iter().sum();
        for slot in &mut out.data[base..base + c] {
            *slot = total;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    // Direct four-loop oracle: independent of the production path above.
    fn conv_oracle(x: &Tensor, kernel: &Kernel) -> Tensor {
        let (h, w, c) = x.shape();
        let s = kernel.size() as isize;
        let r = kernel.radius() as isize;
        let mut out = Tensor::zeros(h, w, c);
        for ch in 0..c {
            for i in 0..h as isize {
                for j in 0..w as isize {
                    let mut acc = 0.0;
                    for u in 0..s {
                        for v in 0..s {
                            let ii = i + r - u;
                            let jj = j + r - v;
                            if ii >= 0 && ii < h as isize && jj >= 0 && jj < w as isize {
                                acc += x.get(ii as usize, jj as usize, ch)
                                    * kernel.at(u as usize, v as usize);
                            }
                        }
                    }
                    out.set(i as usize, j as usize, ch, acc);
                }
            }
        }
        out
    }

    fn pseudo(seed: u64, n: usize) -> Vec<f64> {
        // splitmix64-style generator for reproducible test data
        let mut z = seed;
        (0..n)
            .map(|_| {
                z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
                let mut v = z;
                v = (v ^ (v >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
                v = (v ^ (v >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
                v ^= v >> 31;
                (v >> 11) as f64 / (1u64 << 53) as f64 * 255.0
            })
            .collect()
    }

    #[test]
    fn hadamard_basic_identity_annihilator() {
        let a = Tensor::new(2, 2, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor::new(2, 2, 1, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(hadamard(&a, &b).unwrap().data(), &[0.0, 2.0, 3.0, 0.0]);

        let ones = Tensor::filled(2, 2, 1, 1.0);
        assert_eq!(hadamard(&a, &ones).unwrap(), a);

        let zeros = Tensor::zeros(2, 2, 1);
        assert_eq!(hadamard(&a, &zeros).unwrap(), zeros);
    }

    #[test]
    fn hadamard_shape_mismatch_errors() {
        let a = Tensor::zeros(2, 2, 1);
        let b = Tensor::zeros(2, 3, 1);
        assert!(matches!(hadamard(&a, &b), Err(TensorError::ShapeMismatch { .. })));
    }

    #[test]
    fn even_kernel_rejected() {
        assert!(matches!(Kernel::ones(4), Err(TensorError::EvenKernel { size: 4 })));
        assert!(matches!(Kernel::new(2, vec![1.0; 4]), Err(TensorError::EvenKernel { .. })));
    }

    #[test]
    fn conv_ones_image_ones_kernel_counts_overlap() {
        let x = Tensor::filled(3, 3, 1, 1.0);
        let k = Kernel::ones(3).unwrap();
        let y = conv2d_same(&x, &k, ConvMode::PerChannel);
        assert_eq!(y.get(1, 1, 0), 9.0);
        assert_eq!(y.get(0, 0, 0), 4.0);
        assert_eq!(y.get(0, 2, 0), 4.0);
        assert_eq!(y.get(2, 0, 0), 4.0);
        assert_eq!(y.get(2, 2, 0), 4.0);
        assert_eq!(y.get(0, 1, 0), 6.0);
    }

    #[test]
    fn conv_delta_impulse_response_is_the_kernel() {
        let mut x = Tensor::zeros(5, 5, 1);
        x.set(2, 2, 0, 1.0);
        let k = Kernel::new(3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]).unwrap();
        let y = conv2d_same(&x, &k, ConvMode::PerChannel);
        // conv(delta, k) = k in its own index layout; correlation would show
        // it rotated 180 degrees. Pins the flip convention.
        for u in 0..3usize {
            for v in 0..3usize {
                assert_eq!(y.get(1 + u, 1 + v, 0), k.at(u, v), "at ({u},{v})");
            }
        }
        let corr = conv2d_same(&x, &k.flipped(), ConvMode::PerChannel);
        assert_eq!(corr.get(1, 1, 0), k.at(2, 2));
    }

    #[test]
    fn conv_matches_four_loop_oracle_on_random_input() {
        let x = Tensor::new(8, 8, 1, pseudo(7, 64)).unwrap();
        let k = Kernel::new(3, pseudo(11, 9)).unwrap();
        let got = conv2d_same(&x, &k, ConvMode::PerChannel);
        let want = conv_oracle(&x, &k);
        for (g, w) in got.data().iter().zip(want.data()) {
            assert!((g - w).abs() < 1e-6, "{g} vs {w}");
        }
    }

    #[test]
    fn conv_multichannel_matches_oracle() {
        let x = Tensor::new(6, 5, 3, pseudo(21, 90)).unwrap();
        let k = Kernel::new(5, pseudo(22, 25)).unwrap();
        let got = conv2d_same(&x, &k, ConvMode::PerChannel);
        let want = conv_oracle(&x, &k);
        for (g, w) in got.data().iter().zip(want.data()) {
            assert!((g - w).abs() < 1e-6);
        }
    }

    #[test]
    fn conv_sum_channels_broadcasts_channel_total() {
        let x = Tensor::new(4, 4, 3, pseudo(31, 48)).unwrap();
        let k = Kernel::new(3, pseudo(32, 9)).unwrap();
        let per = conv2d_same(&x, &k, ConvMode::PerChannel);
        let sum = conv2d_same(&x, &k, ConvMode::SumChannels);
        for i in 0..4 {
            for j in 0..4 {
                let total: f64 = (0..3).map(|ch| per.get(i, j, ch)).sum();
                for ch in 0..3 {
                    assert!((sum.get(i, j, ch) - total).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn conv_is_linear() {
        let x = Tensor::new(16, 16, 1, pseudo(41, 256)).unwrap();
        let y = Tensor::new(16, 16, 1, pseudo(42, 256)).unwrap();
        let k = Kernel::new(3, pseudo(43, 9)).unwrap();
        let (a, b) = (1.75, -0.5);
        let mixed = Tensor::new(
            16,
            16,
            1,
            x.data().iter().zip(y.data()).map(|(&p, &q)| a * p + b * q).collect(),
        )
        .unwrap();
        let lhs = conv2d_same(&mixed, &k, ConvMode::PerChannel);
        let cx = conv2d_same(&x, &k, ConvMode::PerChannel);
        let cy = conv2d_same(&y, &k, ConvMode::PerChannel);
        for ((l, p), q) in lhs.data().iter().zip(cx.data()).zip(cy.data()) {
            assert!((l - (a * p + b * q)).abs() < 1e-6);
        }
    }

    #[test]
    fn conv_output_shape_equals_input_shape() {
        for &(h, w, c, s) in &[(1usize, 1usize, 1usize, 3usize), (4, 7, 3, 5), (9, 3, 1, 7)] {
            let x = Tensor::zeros(h, w, c);
            let k = Kernel::ones(s).unwrap();
            assert_eq!(conv2d_same(&x, &k, ConvMode::PerChannel).shape(), (h, w, c));
        }
    }
}
