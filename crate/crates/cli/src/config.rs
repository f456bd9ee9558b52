//! Pipeline configuration, loaded from a JSON file with full defaults.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use muskit_dsp::{F0Params, FrameParams, SegmentPolicy};
use muskit_score::LintPolicy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    /// Codebook size for semantic (single-stage) tokenizers.
    pub k: usize,
    /// Stage count for residual quantizers.
    pub n_stages: usize,
    /// Per-stage codebook size for residual quantizers.
    pub k_per_stage: usize,
    pub seed: u64,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            k: 128,
            n_stages: 4,
            k_per_stage: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Working sample rate; everything is resampled to it at ingest.
    pub sample_rate_hz: u32,
    pub frame: FrameParams,
    pub f0: F0Params,
    pub segment: SegmentPolicy,
    pub lint: LintPolicy,
    pub tokenizer: TokenizerConfig,
    pub mcep_coeffs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sample_rate_hz: 24000,
            frame: FrameParams::default(),
            f0: F0Params::default(),
            segment: SegmentPolicy::default(),
            lint: LintPolicy::default(),
            tokenizer: TokenizerConfig::default(),
            mcep_coeffs: 25,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let mut config = match path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str::<PipelineConfig>(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => PipelineConfig::default(),
        };
        // the top-level rate is authoritative for the frame grid
        config.frame.sample_rate_hz = config.sample_rate_hz;
        config.frame.validate().map_err(anyhow::Error::msg)?;
        config.segment.validate().map_err(anyhow::Error::msg)?;
        if !(2..=config.frame.n_mels).contains(&config.mcep_coeffs) {
            anyhow::bail!(
                "mcep_coeffs ({}) must be within 2..={}",
                config.mcep_coeffs,
                config.frame.n_mels
            );
        }
        Ok(config)
    }

    /// The exact configuration echoed into every output artifact.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
