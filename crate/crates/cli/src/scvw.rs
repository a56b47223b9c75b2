//! SCVW weight container.
//!
//! Layout: 6 magic bytes "SCVW1\n"; an 8-byte little-endian unsigned length
//! L; L bytes of UTF-8 JSON metadata (ordered layer list, conv orientation
//! and activation-scale conventions, per-layer epsilon); then the weight
//! payloads as 32-bit little-endian IEEE-754, row-major, conv order
//! [out][in][kh][kw], concatenated in metadata order. Total file length must
//! match the metadata exactly.

use std::fs;
use std::path::Path;

use seconv_core::network::{GraphError, Layer, NetworkGraph};
use seconv_core::seconv::SeConvBlockSpec;
use seconv_core::tensor::Kernel;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAGIC: &[u8; 6] = b"SCVW1\n";
pub const ORIENTATION: &str = "cross-correlation";
pub const ACTIVATION_SCALE: &str = "unit";

#[derive(Debug, Error)]
pub enum ScvwError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: not an SCVW container")]
    BadMagic,
    #[error("declared metadata length {declared} exceeds file size {actual}")]
    MetadataLength { declared: u64, actual: usize },
    #[error("metadata is not valid JSON: {0}")]
    Metadata(String),
    #[error("unsupported container version {0}")]
    Version(u32),
    #[error("unsupported conv orientation {0:?}")]
    Orientation(String),
    #[error("unsupported activation scale {0:?}")]
    Scale(String),
    #[error("layer {layer} ({kind}): payload truncated, needed {needed} more values")]
    Truncated { layer: usize, kind: &'static str, needed: usize },
    #[error("{trailing} trailing payload bytes after the last layer")]
    TrailingBytes { trailing: usize },
    #[error("payload length {got} is not a whole number of f32 values")]
    RaggedPayload { got: usize },
    #[error("layer {layer}: {source}")]
    Shape { layer: usize, source: GraphError },
    #[error("graph validation failed: {0}")]
    Graph(#[from] GraphError),
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    version: u32,
    orientation: String,
    scale: String,
    input_channels: usize,
    layers: Vec<LayerMeta>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LayerMeta {
    Seconv { size: usize, eta: u32 },
    Conv { out: usize, r#in: usize, kh: usize, kw: usize, bias: bool },
    BatchNorm { channels: usize, epsilon: f64 },
    Relu,
    OutputCompose,
}

impl LayerMeta {
    fn kind(&self) -> &'static str {
        match self {
            LayerMeta::Seconv { .. } => "seconv",
            LayerMeta::Conv { .. } => "conv",
            LayerMeta::BatchNorm { .. } => "batch_norm",
            LayerMeta::Relu => "relu",
            LayerMeta::OutputCompose => "output_compose",
        }
    }

    fn value_count(&self) -> usize {
        match self {
            LayerMeta::Seconv { size, .. } => size * size,
            LayerMeta::Conv { out, r#in, kh, kw, bias } => {
                out * r#in * kh * kw + if *bias { *out } else { 0 }
            }
            LayerMeta::BatchNorm { channels, .. } => 4 * channels,
            LayerMeta::Relu | LayerMeta::OutputCompose => 0,
        }
    }
}

/// Loads and shape-validates a network graph from an SCVW file.
pub fn load_weights(path: &Path) -> Result<NetworkGraph, ScvwError> {
    let bytes = fs::read(path)?;
    parse(&bytes)
}

pub fn parse(bytes: &[u8]) -> Result<NetworkGraph, ScvwError> {
    if bytes.len() < MAGIC.len() + 8 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(ScvwError::BadMagic);
    }
    let len_bytes: [u8; 8] = bytes[6..14].try_into().expect("fixed slice");
    let meta_len = u64::from_le_bytes(len_bytes);
    let payload_start = 14usize
        .checked_add(meta_len as usize)
        .filter(|&end| end <= bytes.len())
        .ok_or(ScvwError::MetadataLength { declared: meta_len, actual: bytes.len() })?;
    let meta: Meta = serde_json::from_slice(&bytes[14..payload_start])
        .map_err(|e| ScvwError::Metadata(e.to_string()))?;
    if meta.version != 1 {
        return Err(ScvwError::Version(meta.version));
    }
    if meta.orientation != ORIENTATION {
        return Err(ScvwError::Orientation(meta.orientation));
    }
    if meta.scale != ACTIVATION_SCALE {
        return Err(ScvwError::Scale(meta.scale));
    }

    let payload = &bytes[payload_start..];
    if !payload.len().is_multiple_of(4) {
        return Err(ScvwError::RaggedPayload { got: payload.len() });
    }
    let mut values = payload
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("chunk of 4"))));
    let mut remaining = payload.len() / 4;

    let mut layers = Vec::with_capacity(meta.layers.len());
    for (idx, lm) in meta.layers.iter().enumerate() {
        let need = lm.value_count();
        if need > remaining {
            return Err(ScvwError::Truncated {
                layer: idx,
                kind: lm.kind(),
                needed: need - remaining,
            });
        }
        remaining -= need;
        let layer = match *lm {
            LayerMeta::Seconv { size, eta } => {
                let weights: Vec<f64> = values.by_ref().take(size * size).collect();
                let kernel = Kernel::new(size, weights)
                    .map_err(|_| ScvwError::Shape { layer: idx, source: GraphError::EvenConvKernel { layer: idx } })?;
                let block = SeConvBlockSpec::new(kernel, eta).map_err(|_| ScvwError::Shape {
                    layer: idx,
                    source: GraphError::EvenConvKernel { layer: idx },
                })?;
                Layer::SeConv(block)
            }
            LayerMeta::Conv { out, r#in, kh, kw, bias } => {
                let weights: Vec<f64> = values.by_ref().take(out * r#in * kh * kw).collect();
                let bias_vec: Vec<f64> =
                    if bias { values.by_ref().take(out).collect() } else { vec![0.0; out] };
                Layer::Conv { out_channels: out, in_channels: r#in, kh, kw, weights, bias: bias_vec }
            }
            LayerMeta::BatchNorm { channels, epsilon } => {
                let gamma: Vec<f64> = values.by_ref().take(channels).collect();
                let beta: Vec<f64> = values.by_ref().take(channels).collect();
                let mean: Vec<f64> = values.by_ref().take(channels).collect();
                let var: Vec<f64> = values.by_ref().take(channels).collect();
                Layer::BatchNorm { gamma, beta, mean, var, epsilon }
            }
            LayerMeta::Relu => Layer::Relu,
            LayerMeta::OutputCompose => Layer::OutputCompose,
        };
        layers.push(layer);
    }
    if remaining != 0 {
        return Err(ScvwError::TrailingBytes { trailing: remaining * 4 });
    }
    Ok(NetworkGraph::new(meta.input_channels, layers)?)
}

/// Serializes a graph to the container format. Weights are stored as f32,
/// so save(load(f)) is byte-identical for files produced by this writer.
pub fn save_weights(path: &Path, graph: &NetworkGraph) -> Result<(), ScvwError> {
    fs::write(path, to_bytes(graph)).map_err(ScvwError::from)
}

pub fn to_bytes(graph: &NetworkGraph) -> Vec<u8> {
    let mut metas = Vec::new();
    let mut payload: Vec<u8> = Vec::new();
    let push = |vals: &[f64], payload: &mut Vec<u8>| {
        for &v in vals {
            payload.extend_from_slice(&(v as f32).to_le_bytes());
        }
    };
    for layer in graph.layers() {
        let meta = match layer {
            Layer::SeConv(block) => {
                push(block.kernel().weights(), &mut payload);
                LayerMeta::Seconv { size: block.size(), eta: block.eta() }
            }
            Layer::Conv { out_channels, in_channels, kh, kw, weights, bias } => {
                push(weights, &mut payload);
                push(bias, &mut payload);
                LayerMeta::Conv {
                    out: *out_channels,
                    r#in: *in_channels,
                    kh: *kh,
                    kw: *kw,
                    bias: true,
                }
            }
            Layer::BatchNorm { gamma, beta, mean, var, epsilon } => {
                push(gamma, &mut payload);
                push(beta, &mut payload);
                push(mean, &mut payload);
                push(var, &mut payload);
                LayerMeta::BatchNorm { channels: gamma.len(), epsilon: *epsilon }
            }
            Layer::Relu => LayerMeta::Relu,
            Layer::OutputCompose => LayerMeta::OutputCompose,
        };
        metas.push(meta);
    }
    let meta = Meta {
        version: 1,
        orientation: ORIENTATION.to_string(),
        scale: ACTIVATION_SCALE.to_string(),
        input_channels: graph.input_channels(),
        layers: metas,
    };
    let meta_json = serde_json::to_vec(&meta).expect("metadata serializes");
    let mut out = Vec::with_capacity(14 + meta_json.len() + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(meta_json.len() as u64).to_le_bytes());
    out.extend_from_slice(&meta_json);
    out.extend_from_slice(&payload);
    out
}
