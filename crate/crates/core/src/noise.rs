//! SAP corruption generator and the 255→0 preprocessing stage.
//!
//! Corruption decisions are made per pixel from a counter-based hash of
//! (seed, linear index), so the output is independent of iteration order and
//! identical across thread counts.

use core::fmt;

use crate::image::{Image, Scale};

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseError {
    /// Density or a split probability is negative or exceeds 1.
    InvalidDensity { density: f64 },
    /// salt_prob + pepper_prob disagrees with density beyond 1e-12.
    SplitMismatch { density: f64, sum: f64 },
    /// Corruption writes 0/255 values and only makes sense on u8-scale data.
    NotU8Scale,
}

impl fmt::Display for NoiseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseError::InvalidDensity { density } => {
                write!(f, "noise density {density} outside [0, 1]")
            }
            NoiseError::SplitMismatch { density, sum } => {
                write!(f, "salt+pepper probabilities sum to {sum}, expected density {density}")
            }
            NoiseError::NotU8Scale => write!(f, "SAP corruption requires a u8-scale image"),
        }
    }
}

impl core::error::Error for NoiseError {}

/// Salt-and-pepper corruption parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    density: f64,
    salt_prob: f64,
    pepper_prob: f64,
    seed: u64,
}

impl NoiseSpec {
    /// Even split: salt and pepper probabilities both density/2.
    pub fn new(density: f64, seed: u64) -> Result<Self, NoiseError> {
        Self::with_split(density / 2.0, density / 2.0, seed)
    }

    pub fn with_split(salt_prob: f64, pepper_prob: f64, seed: u64) -> Result<Self, NoiseError> {
        let density = salt_prob + pepper_prob;
        if !(0.0..=1.0).contains(&salt_prob)
            || !(0.0..=1.0).contains(&pepper_prob)
            || !(0.0..=1.0).contains(&density)
            || density.is_nan()
        {
            return Err(NoiseError::InvalidDensity { density });
        }
        Ok(Self { density, salt_prob, pepper_prob, seed })
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn salt_prob(&self) -> f64 {
        self.salt_prob
    }

    pub fn pepper_prob(&self) -> f64 {
        self.pepper_prob
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// splitmix64 finalizer; also the mixing primitive for derived seeds.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in [0, 1) addressed by (seed, counter); order-independent.
#[inline]
pub fn counter_uniform(seed: u64, counter: u64) -> f64 {
    let h = splitmix64(splitmix64(seed) ^ counter.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Outcome of [`add_sap_noise`], carrying the corrupted-pixel tally.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyImage {
    pub image: Image,
    pub salt_count: usize,
    pub pepper_count: usize,
}

impl NoisyImage {
    pub fn corrupted_count(&self) -> usize {
        self.salt_count + self.pepper_count
    }
}

/// Corrupts each element independently: 0 with probability pepper_prob,
/// 255 with probability salt_prob, untouched otherwise. Channels of color
/// images are corrupted independently. Deterministic for a fixed seed.
pub fn add_sap_noise(y: &Image, spec: &NoiseSpec) -> Result<NoisyImage, NoiseError> {
    if y.scale() != Scale::U8 {
        return Err(NoiseError::NotU8Scale);
    }
    let mut out = y.clone();
    let mut salt = 0usize;
    let mut pepper = 0usize;
    let salt_floor = 1.0 - spec.salt_prob;
    for (idx, value) in out.data_mut().iter_mut().enumerate() {
        let u = counter_uniform(spec.seed, idx as u64);
        if u < spec.pepper_prob {
            *value = 0.0;
            pepper += 1;
        } else if u >= salt_floor {
            *value = 255.0;
            salt += 1;
        }
    }
    Ok(NoisyImage { image: out, salt_count: salt, pepper_count: pepper })
}

/// Maps every 255-valued pixel to 0 so that all noisy pixels are zero.
/// Idempotent; conflates genuinely-255 clean pixels by design.
pub fn preprocess(x: &Image) -> Image {
    let mut out = x.clone();
    for v in out.data_mut() {
        if *v == 255.0 {
            *v = 0.0;
        }
    }
    out
}
