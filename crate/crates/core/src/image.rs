//! Image and pixel-map containers.
//!
//! An [`Image`] is a scale-labelled tensor holding intensities; a
//! [`PixelMap`] is a same-shaped binary tensor marking zero-valued (noisy)
//! pixels. All arithmetic is f64 internally; u8 data is widened on entry and
//! clamped back only at serialization time.

use alloc::vec::Vec;
use core::fmt;

use crate::tensor::{Shape, Tensor, TensorError};

/// Intensity domain of an image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// 8-bit domain: values in [0, 255].
    U8,
    /// Unit interval: values in [0.0, 1.0].
    Unit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageError {
    Tensor(TensorError),
    /// Channel count must be 1 (grayscale) or 3 (RGB).
    BadChannels { channels: usize },
    /// A value fell outside the declared scale at a validated entry point.
    OutOfRange { index: usize, value_milli: i64 },
}

impl fmt::Display for ImageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ImageError::Tensor(e) => write!(f, "{e}"),
            ImageError::BadChannels { channels } => {
                write!(f, "channel count must be 1 or 3, got {channels}")
            }
            ImageError::OutOfRange { index, value_milli } => {
                write!(f, "value {} at index {index} outside scale range", *value_milli as f64 / 1000.0)
            }
        }
    }
}

impl core::error::Error for ImageError {}

impl From<TensorError> for ImageError {
    fn from(e: TensorError) -> Self {
        ImageError::Tensor(e)
    }
}

/// H×W×C intensity image. C is 1 or 3.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    tensor: Tensor,
    scale: Scale,
}

impl Image {
    /// Builds an image from raw f64 data without range checks; operator
    /// outputs may legitimately exceed the scale range until serialized.
    pub fn from_tensor(tensor: Tensor, scale: Scale) -> Result<Self, ImageError> {
        let c = tensor.channels();
        if c != 1 && c != 3 {
            return Err(ImageError::BadChannels { channels: c });
        }
        Ok(Self { tensor, scale })
    }

    /// Builds a u8-scale image from byte data (always in range).
    pub fn from_u8(height: usize, width: usize, channels: usize, bytes: &[u8]) -> Result<Self, ImageError> {
        let data: Vec<f64> = bytes.iter().map(|&b| f64::from(b)).collect();
        let tensor = Tensor::new(height, width, channels, data)?;
        Self::from_tensor(tensor, Scale::U8)
    }

    pub fn zeros(height: usize, width: usize, channels: usize, scale: Scale) -> Result<Self, ImageError> {
        Self::from_tensor(Tensor::zeros(height, width, channels), scale)
    }

    pub fn height(&self) -> usize {
        self.tensor.height()
    }

    pub fn width(&self) -> usize {
        self.tensor.width()
    }

    pub fn channels(&self) -> usize {
        self.tensor.channels()
    }

    pub fn shape(&self) -> Shape {
        self.tensor.shape()
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn data(&self) -> &[f64] {
        self.tensor.data()
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        self.tensor.data_mut()
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> Tensor {
        self.tensor
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.tensor.get(row, col, ch)
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, ch: usize, value: f64) {
        self.tensor.set(row, col, ch, value);
    }

    /// Number of exactly-zero elements.
    pub fn zero_count(&self) -> usize {
        self.tensor.data().iter().filter(|&&v| v == 0.0).count()
    }

    /// Clamps to the scale range and rounds to bytes for serialization.
    pub fn to_u8(&self) -> Vec<u8> {
        let factor = match self.scale {
            Scale::U8 => 1.0,
            Scale::Unit => 255.0,
        };
        self.tensor
            .data()
            .iter()
            .map(|&v| libm::round((v * factor).clamp(0.0, 255.0)) as u8)
            .collect()
    }
}

/// Binary tensor marking pixels; 1 where the source pixel is noisy (zero
/// after preprocessing), 0 otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMap {
    height: usize,
    width: usize,
    channels: usize,
    bits: Vec<u8>,
}

impl PixelMap {
    pub fn new(height: usize, width: usize, channels: usize, bits: Vec<u8>) -> Result<Self, ImageError> {
        if bits.len() != height * width * channels {
            return Err(ImageError::Tensor(TensorError::ShapeMismatch {
                left: (height, width, channels),
                right: (bits.len(), 1, 1),
            }));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(ImageError::OutOfRange { index: 0, value_milli: 0 });
        }
        Ok(Self { height, width, channels, bits })
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

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> u8 {
        self.bits[(row * self.width + col) * self.channels + ch]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Lifts the map to an f64 tensor of 0s and 1s for convolution.
    pub fn to_tensor(&self) -> Tensor {
        let data = self.bits.iter().map(|&b| f64::from(b)).collect();
        Tensor::new(self.height, self.width, self.channels, data).expect("map shape is valid")
    }
}

/// Map of noisy pixels: 1 exactly where the image value is 0.
///
/// The image is expected to be preprocessed (all noisy pixels already 0);
/// clean pixels that genuinely hold 0 are marked too.
pub fn noisy_map(x: &Image) -> PixelMap {
    let (h, w, c) = x.shape();
    let bits = x.data().iter().map(|&v| u8::from(v == 0.0)).collect();
    PixelMap { height: h, width: w, channels: c, bits }
}

/// Flips 1s and 0s; an involution.
pub fn complement(m: &PixelMap) -> PixelMap {
    PixelMap {
        height: m.height,
        width: m.width,
        channels: m.channels,
        bits: m.bits.iter().map(|&b| 1 - b).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn noisy_map_marks_zeros() {
        let img = Image::from_u8(2, 2, 1, &[0, 5, 7, 0]).unwrap();
        let m = noisy_map(&img);
        assert_eq!(m.bits(), &[1, 0, 0, 1]);
    }

    #[test]
    fn noisy_map_all_zero_and_no_zero() {
        let zeros = Image::zeros(3, 2, 1, Scale::U8).unwrap();
        assert_eq!(noisy_map(&zeros).bits(), &[1u8; 6][..]);

        let img = Image::from_u8(2, 2, 1, &[1, 2, 3, 4]).unwrap();
        assert_eq!(noisy_map(&img).bits(), &[0u8; 4][..]);
    }

    #[test]
    fn complement_flips_and_is_involution() {
        let m = PixelMap::new(2, 2, 1, vec![1, 0, 0, 1]).unwrap();
        let c = complement(&m);
        assert_eq!(c.bits(), &[0, 1, 1, 0]);
        assert_eq!(complement(&c), m);

        let ones = PixelMap::new(1, 4, 1, vec![1; 4]).unwrap();
        assert_eq!(complement(&ones).bits(), &[0u8; 4][..]);
    }

    #[test]
    fn map_and_complement_partition() {
        let img = Image::from_u8(3, 3, 1, &[0, 1, 2, 0, 3, 0, 4, 5, 0]).unwrap();
        let m = noisy_map(&img);
        let mc = complement(&m);
        for (a, b) in m.bits().iter().zip(mc.bits()) {
            assert_eq!(a + b, 1);
        }
    }

    #[test]
    fn channels_validated() {
        assert!(matches!(
            Image::from_tensor(Tensor::zeros(2, 2, 2), Scale::U8),
            Err(ImageError::BadChannels { channels: 2 })
        ));
    }

    #[test]
    fn u8_round_trip_is_exact() {
        let bytes: Vec<u8> = (0..=255).collect();
        let img = Image::from_u8(16, 16, 1, &bytes).unwrap();
        assert_eq!(img.to_u8(), bytes);
    }

    #[test]
    fn to_u8_clamps_out_of_range() {
        let t = Tensor::new(1, 3, 1, vec![-4.0, 128.4, 300.0]).unwrap();
        let img = Image::from_tensor(t, Scale::U8).unwrap();
        assert_eq!(img.to_u8(), vec![0, 128, 255]);
    }
}
