//! Salt-and-pepper image denoising built around selective convolution.
//!
//! The crate provides the numeric kernels only and is `no_std` + `alloc`:
//! image/tensor containers and elementwise algebra ([`tensor`], [`image`]),
//! an exact SAP noise model ([`noise`]), the selective-convolution block and
//! its ascending 7-block cascade ([`seconv`]), a forward-only inference
//! engine for the full denoising network ([`network`]), PSNR/SSIM/MSE
//! evaluation ([`metrics`]), and classical median baselines ([`baseline`]).
//!
//! File formats, the CLI, and the benchmark harness live in the companion
//! `seconv-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baseline;
pub mod image;
pub mod metrics;
pub mod network;
pub mod noise;
pub mod seconv;
pub mod tensor;

pub use image::{Image, PixelMap, Scale};
pub use tensor::Tensor;
