//! Plain-text key-value cascade configuration.
//!
//! ```text
//! # comment
//! sizes = 3,5,7,9,11,13,15
//! kernel = ones              # ones | inverse-distance
//! eta = auto                 # auto (max(1, s-2)) | fixed positive integer
//! finalize = repeat-last     # repeat-last | leave | global-mean-fill
//! ```
//!
//! Missing keys take the standard-cascade defaults.

use std::fs;
use std::path::Path;

use seconv_core::seconv::{default_eta, CascadeSpec, FinalizePolicy, SeConvBlockSpec};
use seconv_core::tensor::Kernel;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected `key = value`")]
    BadLine { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value {value:?} for {key}")]
    BadValue { line: usize, key: &'static str, value: String },
    #[error("invalid cascade: {0}")]
    Cascade(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelChoice {
    #[default]
    Ones,
    InverseDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaRule {
    #[default]
    Auto,
    Fixed(u32),
}

/// Parsed configuration; build() turns it into a cascade spec.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeConfig {
    pub sizes: Vec<usize>,
    pub kernel: KernelChoice,
    pub eta: EtaRule,
    pub finalize: FinalizePolicy,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            sizes: vec![3, 5, 7, 9, 11, 13, 15],
            kernel: KernelChoice::Ones,
            eta: EtaRule::Auto,
            finalize: FinalizePolicy::RepeatLast,
        }
    }
}

impl CascadeConfig {
    pub fn build(&self) -> Result<CascadeSpec, ConfigError> {
        let cascade = |e: &dyn std::fmt::Display| ConfigError::Cascade(e.to_string());
        let mut blocks = Vec::with_capacity(self.sizes.len());
        for &size in &self.sizes {
            let kernel = match self.kernel {
                KernelChoice::Ones => Kernel::ones(size).map_err(|e| cascade(&e))?,
                KernelChoice::InverseDistance => SeConvBlockSpec::inverse_distance(size)
                    .map_err(|e| cascade(&e))?
                    .kernel()
                    .clone(),
            };
            let eta = match self.eta {
                EtaRule::Auto => default_eta(size),
                EtaRule::Fixed(n) => n,
            };
            blocks.push(SeConvBlockSpec::new(kernel, eta).map_err(|e| cascade(&e))?);
        }
        CascadeSpec::new(blocks, self.finalize).map_err(|e| cascade(&e))
    }
}

pub fn load_cascade_config(path: &Path) -> Result<CascadeSpec, ConfigError> {
    let text = fs::read_to_string(path)?;
    parse_cascade_config(&text)?.build()
}

pub fn parse_cascade_config(text: &str) -> Result<CascadeConfig, ConfigError> {
    let mut config = CascadeConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or(ConfigError::BadLine { line })?;
        match key {
            "sizes" => {
                let sizes: Result<Vec<usize>, _> =
                    value.split(',').map(|tok| tok.trim().parse::<usize>()).collect();
                config.sizes = sizes.map_err(|_| ConfigError::BadValue {
                    line,
                    key: "sizes",
                    value: value.to_string(),
                })?;
            }
            "kernel" => {
                config.kernel = match value {
                    "ones" => KernelChoice::Ones,
                    "inverse-distance" => KernelChoice::InverseDistance,
                    _ => {
                        return Err(ConfigError::BadValue {
                            line,
                            key: "kernel",
                            value: value.to_string(),
                        })
                    }
                };
            }
            "eta" => {
                config.eta = if value == "auto" {
                    EtaRule::Auto
                } else {
                    EtaRule::Fixed(value.parse().map_err(|_| ConfigError::BadValue {
                        line,
                        key: "eta",
                        value: value.to_string(),
                    })?)
                };
            }
            "finalize" => {
                config.finalize = match value {
                    "repeat-last" => FinalizePolicy::RepeatLast,
                    "leave" => FinalizePolicy::Leave,
                    "global-mean-fill" => FinalizePolicy::GlobalMeanFill,
                    _ => {
                        return Err(ConfigError::BadValue {
                            line,
                            key: "finalize",
                            value: value.to_string(),
                        })
                    }
                };
            }
            other => {
                return Err(ConfigError::UnknownKey { line, key: other.to_string() });
            }
        }
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_standard_cascade() {
        let spec = parse_cascade_config("").unwrap().build().unwrap();
        assert_eq!(spec, CascadeSpec::standard());
    }

    #[test]
    fn full_config_round_trip() {
        let text = "\
# custom run
sizes = 3,7,11
kernel = inverse-distance
eta = 2
finalize = leave
";
        let cfg = parse_cascade_config(text).unwrap();
        assert_eq!(cfg.sizes, vec![3, 7, 11]);
        assert_eq!(cfg.kernel, KernelChoice::InverseDistance);
        assert_eq!(cfg.eta, EtaRule::Fixed(2));
        assert_eq!(cfg.finalize, FinalizePolicy::Leave);
        let spec = cfg.build().unwrap();
        assert_eq!(spec.blocks().len(), 3);
        assert!(spec.blocks().iter().all(|b| b.eta() == 2));
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        match parse_cascade_config("sizes = 3\nwat = 1\n") {
            Err(ConfigError::UnknownKey { line: 2, key }) => assert_eq!(key, "wat"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_values_rejected() {
        assert!(matches!(
            parse_cascade_config("kernel = gaussian"),
            Err(ConfigError::BadValue { key: "kernel", .. })
        ));
        assert!(matches!(
            parse_cascade_config("sizes = 3,x"),
            Err(ConfigError::BadValue { key: "sizes", .. })
        ));
        assert!(matches!(parse_cascade_config("just text"), Err(ConfigError::BadLine { line: 1 })));
    }

    #[test]
    fn unordered_sizes_fail_at_build() {
        let cfg = parse_cascade_config("sizes = 7,3").unwrap();
        assert!(matches!(cfg.build(), Err(ConfigError::Cascade(_))));
    }
}
