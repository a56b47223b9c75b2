//! Selective convolution: restores zero-valued (noisy) pixels from the
//! normalized weighted average of non-noisy pixels in their window, gated by
//! a reliability count, and the ascending cascade of seven such blocks that
//! forms a standalone non-learned denoiser.

use alloc::vec::Vec;
use core::fmt;

use crate::image::{noisy_map, Image, PixelMap, Scale};
use crate::noise::preprocess;
use crate::tensor::{conv2d_same, ConvMode, Kernel, Tensor, TensorError};

#[derive(Debug, Clone, PartialEq)]
pub enum SeConvError {
    Tensor(TensorError),
    /// Block sizes of a cascade must be strictly ascending.
    NotAscending { sizes: Vec<usize> },
    /// Reliability threshold must be at least 1.
    ZeroEta,
    /// No non-noisy pixel exists to fill the remainder from.
    Unrestorable,
    /// The cascade consumes raw u8-scale images.
    NotU8Scale,
}

impl fmt::Display for SeConvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeConvError::Tensor(e) => write!(f, "{e}"),
            SeConvError::NotAscending { sizes } => {
                write!(f, "block sizes must be strictly ascending, got {sizes:?}")
            }
            SeConvError::ZeroEta => write!(f, "reliability threshold must be >= 1"),
            SeConvError::Unrestorable => write!(f, "unrestorable image: no non-noisy pixels"),
            SeConvError::NotU8Scale => write!(f, "cascade input must be a u8-scale image"),
        }
    }
}

impl core::error::Error for SeConvError {}

impl From<TensorError> for SeConvError {
    fn from(e: TensorError) -> Self {
        SeConvError::Tensor(e)
    }
}

/// Default reliability threshold for a block of side `size`: max(1, s - 2).
pub fn default_eta(size: usize) -> u32 {
    core::cmp::max(1, size.saturating_sub(2)) as u32
}

/// One selective-convolution block: an s×s kernel plus the minimum count of
/// non-noisy window pixels required before a restoration is accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct SeConvBlockSpec {
    kernel: Kernel,
    eta: u32,
    kernel_is_ones: bool,
}

impl SeConvBlockSpec {
    pub fn new(kernel: Kernel, eta: u32) -> Result<Self, SeConvError> {
        if eta == 0 {
            return Err(SeConvError::ZeroEta);
        }
        let kernel_is_ones = kernel.weights().iter().all(|&w| w == 1.0);
        Ok(Self { kernel, eta, kernel_is_ones })
    }

    /// Unweighted-mean block: all-ones kernel, eta = max(1, s - 2).
    pub fn ones(size: usize) -> Result<Self, SeConvError> {
        Self::new(Kernel::ones(size)?, default_eta(size))
    }

    /// Inverse-Euclidean-distance weights; the center weight is 1 and is
    /// never consumed at restored coordinates (the center is noisy there).
    pub fn inverse_distance(size: usize) -> Result<Self, SeConvError> {
        let r = (size / 2) as isize;
        let mut w = Vec::with_capacity(size * size);
        for u in -r..=r {
            for v in -r..=r {
                let d2 = (u * u + v * v) as f64;
                w.push(if d2 == 0.0 { 1.0 } else { 1.0 / libm::sqrt(d2) });
            }
        }
        Self::new(Kernel::new(size, w)?, default_eta(size))
    }

    pub fn size(&self) -> usize {
        self.kernel.size()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn eta(&self) -> u32 {
        self.eta
    }
}

/// What to do with pixels still noisy after the last block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FinalizePolicy {
    /// Leave them at zero (network mode: later layers absorb the rest).
    Leave,
    /// Reapply the last block until nothing changes, then mean-fill leftovers.
    #[default]
    RepeatLast,
    /// Fill every remaining noisy pixel with the mean of non-noisy pixels.
    GlobalMeanFill,
}

/// Ordered blocks plus the finalize policy.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeSpec {
    blocks: Vec<SeConvBlockSpec>,
    finalize: FinalizePolicy,
}

impl CascadeSpec {
    pub fn new(blocks: Vec<SeConvBlockSpec>, finalize: FinalizePolicy) -> Result<Self, SeConvError> {
        let sizes: Vec<usize> = blocks.iter().map(|b| b.size()).collect();
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SeConvError::NotAscending { sizes });
        }
        Ok(Self { blocks, finalize })
    }

    /// The standard cascade: ones kernels of sizes 3,5,...,15, repeat-last.
    pub fn standard() -> Self {
        let blocks = [3usize, 5, 7, 9, 11, 13, 15]
            .iter()
            .map(|&s| SeConvBlockSpec::ones(s).expect("odd sizes"))
            .collect();
        Self { blocks, finalize: FinalizePolicy::RepeatLast }
    }

    pub fn blocks(&self) -> &[SeConvBlockSpec] {
        &self.blocks
    }

    pub fn finalize(&self) -> FinalizePolicy {
        self.finalize
    }
}

/// Image being restored plus its noisy map; the map always equals
/// `noisy_map(image)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestorationState {
    image: Image,
    noisy: PixelMap,
    restored_count: usize,
}

impl RestorationState {
    /// Starts from a preprocessed image (noisy pixels already zero).
    pub fn new(image: Image) -> Self {
        let noisy = noisy_map(&image);
        Self { image, noisy, restored_count: 0 }
    }

    pub fn image(&self) -> &Image {
        &self.image
    }

    pub fn noisy(&self) -> &PixelMap {
        &self.noisy
    }

    pub fn restored_count(&self) -> usize {
        self.restored_count
    }

    pub fn remaining_noisy(&self) -> usize {
        self.noisy.count_ones()
    }

    pub fn into_image(self) -> Image {
        self.image
    }
}

/// Normalized masked weighted average: S = conv(x, w) / conv(m̃, w) where
/// the denominator is nonzero, else 0. Channels are handled independently.
pub fn selective_conv(x: &Image, m_tilde: &PixelMap, kernel: &Kernel) -> Result<Tensor, TensorError> {
    if x.shape() != m_tilde.shape() {
        return Err(TensorError::ShapeMismatch { left: x.shape(), right: m_tilde.shape() });
    }
    let num = conv2d_same(x.tensor(), kernel, ConvMode::PerChannel);
    let den = conv2d_same(&m_tilde.to_tensor(), kernel, ConvMode::PerChannel);
    Ok(ratio_or_zero(&num, &den))
}

fn ratio_or_zero(num: &Tensor, den: &Tensor) -> Tensor {
    let (h, w, c) = num.shape();
    let data = num
        .data()
        .iter()
        .zip(den.data())
        .map(|(&n, &d)| if d != 0.0 { n / d } else { 0.0 })
        .collect();
    Tensor::new(h, w, c, data).expect("same shape")
}

/// Reliability gate: 1 where the s×s window holds at least `eta` non-noisy
/// pixels (zero-padded borders count as noisy), else 0.
pub fn reliability(m_tilde: &PixelMap, size: usize, eta: u32) -> Result<PixelMap, TensorError> {
    let ones = Kernel::ones(size)?;
    let counts = conv2d_same(&m_tilde.to_tensor(), &ones, ConvMode::PerChannel);
    Ok(threshold_map(&counts, eta))
}

fn threshold_map(counts: &Tensor, eta: u32) -> PixelMap {
    let (h, w, c) = counts.shape();
    // counts are exact small integers in f64, so >= compares exactly
    let bits = counts.data().iter().map(|&n| u8::from(n >= f64::from(eta))).collect();
    PixelMap::new(h, w, c, bits).expect("same shape")
}

/// Tensor-level block pass shared by the standalone cascade and the network
/// layers: zero entries qualified by the reliability gate are replaced by
/// the selective-convolution estimate; everything else passes through
/// untouched. Returns the new tensor and the restored-entry count.
pub fn selective_restore(t: &Tensor, block: &SeConvBlockSpec) -> (Tensor, usize) {
    let (h, w, c) = t.shape();
    let mt_bits: Vec<u8> = t.data().iter().map(|&v| u8::from(v != 0.0)).collect();
    let mt_tensor = Tensor::new(h, w, c, mt_bits.iter().map(|&b| f64::from(b)).collect())
        .expect("same shape");
    let num = conv2d_same(t, block.kernel(), ConvMode::PerChannel);
    let den = conv2d_same(&mt_tensor, block.kernel(), ConvMode::PerChannel);
    // for the all-ones kernel the denominator doubles as the window count
    let counts = if block.kernel_is_ones {
        den.clone()
    } else {
        let ones = Kernel::ones(block.size()).expect("block size is odd");
        conv2d_same(&mt_tensor, &ones, ConvMode::PerChannel)
    };

    let mut out = t.clone();
    let eta = f64::from(block.eta());
    let mut restored = 0usize;
    {
        let data = out.data_mut();
        for (idx, &clean) in mt_bits.iter().enumerate() {
            if clean == 0 && counts.data()[idx] >= eta {
                let d = den.data()[idx];
                if d != 0.0 {
                    data[idx] = num.data()[idx] / d;
                    if data[idx] != 0.0 {
                        restored += 1;
                    }
                }
            }
        }
    }
    (out, restored)
}

/// One block pass: X̂ = X + S ⊙ M ⊙ R with S and R computed from the input
/// state and applied simultaneously. Pixels with M = 0 are left untouched.
pub fn apply_block(state: &RestorationState, block: &SeConvBlockSpec) -> RestorationState {
    let (tensor, _) = selective_restore(state.image.tensor(), block);
    let image = Image::from_tensor(tensor, state.image.scale()).expect("shape preserved");
    let noisy = noisy_map(&image);
    let restored = state.noisy.count_ones() - noisy.count_ones();
    RestorationState { image, noisy, restored_count: state.restored_count + restored }
}

/// Per-stage accounting for a full cascade run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeRun {
    /// Restored-pixel count per block, in block order (size, count).
    pub block_restored: Vec<(usize, usize)>,
    /// Extra passes of the last block performed under repeat-last.
    pub extra_passes: usize,
    /// Pixels restored by those extra passes.
    pub extra_restored: usize,
    /// Pixels set by the final mean fill, if any.
    pub mean_filled: usize,
    /// Noisy pixels still present in the output (finalize = leave only).
    pub remaining_noisy: usize,
}

/// Runs preprocessing, every block in ascending order, and the finalize
/// policy; returns the denoised image plus per-stage counts.
pub fn cascade_denoise_report(x_noisy: &Image, spec: &CascadeSpec) -> Result<(Image, CascadeRun), SeConvError> {
    if x_noisy.scale() != Scale::U8 {
        return Err(SeConvError::NotU8Scale);
    }
    let mut state = RestorationState::new(preprocess(x_noisy));
    let mut run = CascadeRun {
        block_restored: Vec::with_capacity(spec.blocks.len()),
        extra_passes: 0,
        extra_restored: 0,
        mean_filled: 0,
        remaining_noisy: 0,
    };

    for block in &spec.blocks {
        let before = state.restored_count();
        state = apply_block(&state, block);
        run.block_restored.push((block.size(), state.restored_count() - before));
    }

    match spec.finalize {
        FinalizePolicy::Leave => {
            run.remaining_noisy = state.remaining_noisy();
        }
        FinalizePolicy::RepeatLast => {
            if let Some(last) = spec.blocks.last() {
                while state.remaining_noisy() > 0 {
                    let before = state.restored_count();
                    state = apply_block(&state, last);
                    let gained = state.restored_count() - before;
                    if gained == 0 {
                        break;
                    }
                    run.extra_passes += 1;
                    run.extra_restored += gained;
                }
            }
            if state.remaining_noisy() > 0 {
                run.mean_filled = mean_fill(&mut state)?;
            }
        }
        FinalizePolicy::GlobalMeanFill => {
            if state.remaining_noisy() > 0 {
                run.mean_filled = mean_fill(&mut state)?;
            }
        }
    }
    Ok((state.into_image(), run))
}

/// [`cascade_denoise_report`] without the accounting.
pub fn cascade_denoise(x_noisy: &Image, spec: &CascadeSpec) -> Result<Image, SeConvError> {
    cascade_denoise_report(x_noisy, spec).map(|(image, _)| image)
}

fn mean_fill(state: &mut RestorationState) -> Result<usize, SeConvError> {
    let clean_total: f64 = state
        .image
        .data()
        .iter()
        .zip(state.noisy.bits())
        .filter(|(_, &bit)| bit == 0)
        .map(|(&v, _)| v)
        .sum();
    let clean_count = state.image.data().len() - state.noisy.count_ones();
    if clean_count == 0 {
        return Err(SeConvError::Unrestorable);
    }
    let mean = clean_total / clean_count as f64;
    let mut filled = 0usize;
    {
        let data = state.image.data_mut();
        for (idx, bit) in state.noisy.bits().iter().enumerate() {
            if *bit == 1 {
                data[idx] = mean;
                filled += 1;
            }
        }
    }
    state.noisy = noisy_map(&state.image);
    state.restored_count += filled;
    Ok(filled)
}
