//! IO, file formats, and the benchmark harness for the selective-convolution
//! denoiser; the numeric kernels live in `seconv-core`.

pub mod app;
pub mod bench;
pub mod chart;
pub mod config;
pub mod io;
pub mod scvw;
