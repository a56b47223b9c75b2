//! Forward-only evaluation of the denoising network: preprocessing, seven
//! selective-convolution blocks, a conv/batch-norm/ReLU stack, a final conv,
//! and the masked output composition that splices restored values into the
//! noisy coordinates only.
//!
//! Convolution layers use cross-correlation orientation (learned weights
//! make flip versus no-flip a pure convention; the weight container records
//! it). Activations run on the unit interval: images are divided by 255 at
//! graph entry and the residual is multiplied back at exit.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::image::{noisy_map, Image, PixelMap, Scale};
use crate::noise::preprocess;
use crate::seconv::{selective_restore, SeConvBlockSpec};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    /// Image channel count differs from the graph input.
    InputChannels { expected: usize, got: usize },
    /// A conv layer's declared input channels disagree with the running count.
    ChannelMismatch { layer: usize, expected: usize, got: usize },
    /// Weight array length disagrees with the declared shape.
    WeightLength { layer: usize, expected: usize, got: usize },
    /// Bias array length disagrees with the output channel count.
    BiasLength { layer: usize, expected: usize, got: usize },
    /// A batch-norm parameter array length disagrees with the channel count.
    BnLength { layer: usize, expected: usize, got: usize },
    /// Batch-norm moving variance must be strictly positive.
    NonPositiveVariance { layer: usize },
    /// Conv kernels must have odd spatial extent.
    EvenConvKernel { layer: usize },
    /// Output composition is only valid as the final layer.
    ComposeNotLast { layer: usize },
    /// The graph must end with the input channel count restored.
    OutputChannels { expected: usize, got: usize },
    /// The network consumes raw u8-scale images.
    NotU8Scale,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::InputChannels { expected, got } => {
                write!(f, "graph expects {expected} input channels, image has {got}")
            }
            GraphError::ChannelMismatch { layer, expected, got } => {
                write!(f, "layer {layer}: expects {expected} input channels, receives {got}")
            }
            GraphError::WeightLength { layer, expected, got } => {
                write!(f, "layer {layer}: weight array has {got} values, expected {expected}")
            }
            GraphError::BiasLength { layer, expected, got } => {
                write!(f, "layer {layer}: bias array has {got} values, expected {expected}")
            }
            GraphError::BnLength { layer, expected, got } => {
                write!(f, "layer {layer}: batch-norm arrays have {got} values, expected {expected}")
            }
            GraphError::NonPositiveVariance { layer } => {
                write!(f, "layer {layer}: batch-norm variance must be > 0")
            }
            GraphError::EvenConvKernel { layer } => {
                write!(f, "layer {layer}: conv kernel extent must be odd")
            }
            GraphError::ComposeNotLast { layer } => {
                write!(f, "layer {layer}: output composition must be the final layer")
            }
            GraphError::OutputChannels { expected, got } => {
                write!(f, "graph ends with {got} channels, expected {expected}")
            }
            GraphError::NotU8Scale => write!(f, "network input must be a u8-scale image"),
        }
    }
}

impl core::error::Error for GraphError {}

/// One layer of the network, weights included.
#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    SeConv(SeConvBlockSpec),
    Conv {
        out_channels: usize,
        in_channels: usize,
        kh: usize,
        kw: usize,
        /// Row-major [out][in][kh][kw].
        weights: Vec<f64>,
        /// One bias per output channel.
        bias: Vec<f64>,
    },
    BatchNorm {
        gamma: Vec<f64>,
        beta: Vec<f64>,
        mean: Vec<f64>,
        var: Vec<f64>,
        epsilon: f64,
    },
    Relu,
    OutputCompose,
}

/// Ordered layer list plus the input channel count.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    input_channels: usize,
    layers: Vec<Layer>,
}

impl NetworkGraph {
    pub fn new(input_channels: usize, layers: Vec<Layer>) -> Result<Self, GraphError> {
        let graph = Self { input_channels, layers };
        graph.validate()?;
        Ok(graph)
    }

    /// The standard architecture: 7 selective-conv blocks of sizes 3..15,
    /// (depth - 8) conv(filters)+BN+ReLU groups, a final conv back to the
    /// input channel count, and the masked output composition. Conv weights
    /// and biases start at zero, batch norms at identity; callers load real
    /// weights over them.
    pub fn standard(input_channels: usize, depth: usize, filters: usize) -> Result<Self, GraphError> {
        let mut layers = Vec::new();
        for size in [3usize, 5, 7, 9, 11, 13, 15] {
            layers.push(Layer::SeConv(SeConvBlockSpec::ones(size).expect("odd size")));
        }
        let groups = depth.saturating_sub(8);
        let mut in_c = input_channels;
        for _ in 0..groups {
            layers.push(Layer::Conv {
                out_channels: filters,
                in_channels: in_c,
                kh: 3,
                kw: 3,
                weights: vec![0.0; filters * in_c * 9],
                bias: vec![0.0; filters],
            });
            layers.push(Layer::BatchNorm {
                gamma: vec![1.0; filters],
                beta: vec![0.0; filters],
                mean: vec![0.0; filters],
                var: vec![1.0; filters],
                epsilon: 1e-3,
            });
            layers.push(Layer::Relu);
            in_c = filters;
        }
        layers.push(Layer::Conv {
            out_channels: input_channels,
            in_channels: in_c,
            kh: 3,
            kw: 3,
            weights: vec![0.0; input_channels * in_c * 9],
            bias: vec![0.0; input_channels],
        });
        layers.push(Layer::OutputCompose);
        Self::new(input_channels, layers)
    }

    pub fn input_channels(&self) -> usize {
        self.input_channels
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    /// Number of weighted layers (selective-conv blocks count as one each,
    /// conv+BN+ReLU groups as one).
    pub fn depth(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| matches!(l, Layer::SeConv(_) | Layer::Conv { .. }))
            .count()
    }

    /// Checks every layer's shapes against the running channel count.
    pub fn validate(&self) -> Result<(), GraphError> {
        let mut channels = self.input_channels;
        let last = self.layers.len().saturating_sub(1);
        for (idx, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::SeConv(_) | Layer::Relu => {}
                Layer::Conv { out_channels, in_channels, kh, kw, weights, bias } => {
                    if *in_channels != channels {
                        return Err(GraphError::ChannelMismatch {
                            layer: idx,
                            expected: channels,
                            got: *in_channels,
                        });
                    }
                    if kh % 2 == 0 || kw % 2 == 0 {
                        return Err(GraphError::EvenConvKernel { layer: idx });
                    }
                    let expected = out_channels * in_channels * kh * kw;
                    if weights.len() != expected {
                        return Err(GraphError::WeightLength {
                            layer: idx,
                            expected,
                            got: weights.len(),
                        });
                    }
                    if bias.len() != *out_channels {
                        return Err(GraphError::BiasLength {
                            layer: idx,
                            expected: *out_channels,
                            got: bias.len(),
                        });
                    }
                    channels = *out_channels;
                }
                Layer::BatchNorm { gamma, beta, mean, var, .. } => {
                    for arr in [gamma, beta, mean, var] {
                        if arr.len() != channels {
                            return Err(GraphError::BnLength {
                                layer: idx,
                                expected: channels,
                                got: arr.len(),
                            });
                        }
                    }
                    if var.iter().any(|&v| v <= 0.0) {
                        return Err(GraphError::NonPositiveVariance { layer: idx });
                    }
                }
                Layer::OutputCompose => {
                    if idx != last {
                        return Err(GraphError::ComposeNotLast { layer: idx });
                    }
                    if channels != self.input_channels {
                        return Err(GraphError::OutputChannels {
                            expected: self.input_channels,
                            got: channels,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-channel inference batch norm: y = gamma·(x − mean)/sqrt(var + eps) + beta.
pub fn batch_norm_inference(
    x: &Tensor,
    gamma: &[f64],
    beta: &[f64],
    mean: &[f64],
    var: &[f64],
    epsilon: f64,
) -> Result<Tensor, GraphError> {
    let c = x.channels();
    for arr in [gamma, beta, mean, var] {
        if arr.len() != c {
            return Err(GraphError::BnLength { layer: 0, expected: c, got: arr.len() });
        }
    }
    if var.iter().any(|&v| v <= 0.0) {
        return Err(GraphError::NonPositiveVariance { layer: 0 });
    }
    let inv_std: Vec<f64> = var.iter().map(|&v| 1.0 / libm::sqrt(v + epsilon)).collect();
    let mut out = x.clone();
    for (idx, v) in out.data_mut().iter_mut().enumerate() {
        let ch = idx % c;
        *v = gamma[ch] * (*v - mean[ch]) * inv_std[ch] + beta[ch];
    }
    Ok(out)
}

/// Elementwise max(x, 0).
pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| if v > 0.0 { v } else { 0.0 })
}

/// Multi-channel "same"-padded conv in cross-correlation orientation.
fn conv_layer(
    x: &Tensor,
    out_channels: usize,
    kh: usize,
    kw: usize,
    weights: &[f64],
    bias: &[f64],
) -> Tensor {
    let (h, w, in_c) = x.shape();
    let (rh, rw) = ((kh / 2) as isize, (kw / 2) as isize);
    let mut out = Tensor::zeros(h, w, out_channels);
    let x_data = x.data();
    for i in 0..h as isize {
        for j in 0..w as isize {
            let out_base = ((i as usize) * w + j as usize) * out_channels;
            let out_px = &mut out.data_mut()[out_base..out_base + out_channels];
            for (o, slot) in out_px.iter_mut().enumerate() {
                let mut acc = bias[o];
                for u in 0..kh as isize {
                    let ii = i + u - rh;
                    if ii < 0 || ii >= h as isize {
                        continue;
                    }
                    for v in 0..kw as isize {
                        let jj = j + v - rw;
                        if jj < 0 || jj >= w as isize {
                            continue;
                        }
                        let in_base = ((ii as usize) * w + jj as usize) * in_c;
                        let w_base = ((o * in_c) * kh + u as usize) * kw + v as usize;
                        for ci in 0..in_c {
                            acc += x_data[in_base + ci] * weights[w_base + ci * kh * kw];
                        }
                    }
                }
                *slot = acc;
            }
        }
    }
    out
}

/// Applies one non-compose layer to an activation tensor.
pub fn apply_layer(layer: &Layer, x: &Tensor) -> Result<Tensor, GraphError> {
    match layer {
        Layer::SeConv(block) => Ok(selective_restore(x, block).0),
        Layer::Conv { out_channels, kh, kw, weights, bias, .. } => {
            Ok(conv_layer(x, *out_channels, *kh, *kw, weights, bias))
        }
        Layer::BatchNorm { gamma, beta, mean, var, epsilon } => {
            batch_norm_inference(x, gamma, beta, mean, var, *epsilon)
        }
        Layer::Relu => Ok(relu(x)),
        Layer::OutputCompose => Err(GraphError::ComposeNotLast { layer: 0 }),
    }
}

/// Splices the scaled residual into noisy coordinates: clean coordinates are
/// copied from the preprocessed input verbatim, so they stay bit-identical.
fn output_compose(pre: &Image, residual_unit: &Tensor, mask: &PixelMap) -> Tensor {
    let (h, w, c) = pre.shape();
    let mut out = Tensor::zeros(h, w, c);
    for idx in 0..out.len() {
        out.data_mut()[idx] = if mask.bits()[idx] == 1 {
            pre.data()[idx] + residual_unit.data()[idx] * 255.0
        } else {
            pre.data()[idx]
        };
    }
    out
}

/// Full forward pass: preprocess, mask, unit scaling, every layer, and the
/// masked output composition. Coordinates with mask 0 are bit-identical to
/// the preprocessed input for any weights.
pub fn forward(graph: &NetworkGraph, x_noisy: &Image) -> Result<Image, GraphError> {
    if x_noisy.channels() != graph.input_channels {
        return Err(GraphError::InputChannels {
            expected: graph.input_channels,
            got: x_noisy.channels(),
        });
    }
    if x_noisy.scale() != Scale::U8 {
        return Err(GraphError::NotU8Scale);
    }
    let pre = preprocess(x_noisy);
    let mask = noisy_map(&pre);
    let mut t = pre.tensor().scale(1.0 / 255.0);
    let mut composed = false;
    for layer in &graph.layers {
        if matches!(layer, Layer::OutputCompose) {
            t = output_compose(&pre, &t, &mask);
            composed = true;
        } else {
            t = apply_layer(layer, &t)?;
        }
    }
    if !composed {
        t = t.scale(255.0);
    }
    Image::from_tensor(t, Scale::U8).map_err(|_| GraphError::OutputChannels {
        expected: graph.input_channels,
        got: 0,
    })
}
