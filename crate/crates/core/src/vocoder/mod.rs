//! Toy WaveNet-style autoregressive vocoder: a dilated causal convolution
//! stack with gated activations, mel conditioning, and an 8-bit mu-law
//! categorical output head.
//!
//! The module is deliberately language-blind: nothing in its types,
//! parameters, or file formats mentions a language. It consumes mu-law
//! codes and a per-sample conditioning track, and nothing else.

mod backward;
mod generate;
mod net;
mod train;

pub use backward::vocoder_backward;
pub use generate::generate;
pub use net::{init_vocoder_params, vocoder_forward, vocoder_loss, VocoderTape};
pub use train::train_vocoder;

use crate::linalg::Matrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VocoderError {
    #[error("length mismatch: {what} has {actual}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("tape does not match the parameter store it is replayed against")]
    StaleTape,
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("temperature must be >= 0 and finite, got {0}")]
    BadTemperature(f64),
    #[error(transparent)]
    Dsp(#[from] crate::dsp::DspError),
}

/// Stack shape. The dilation cycle is repeated to cover `n_layers`, so
/// `n_layers` must be a multiple of the cycle length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct VocoderConfig {
    pub n_layers: usize,
    pub kernel_size: usize,
    pub dilation_cycle: Vec<usize>,
    pub residual_channels: usize,
    pub skip_channels: usize,
    pub n_classes: usize,
    /// Conditioning upsampling factor: samples per mel frame.
    pub hop_length: usize,
    /// Width of one conditioning row (mel bands).
    pub cond_channels: usize,
}

impl Default for VocoderConfig {
    fn default() -> Self {
        VocoderConfig {
            n_layers: 30,
            kernel_size: 2,
            dilation_cycle: vec![1, 2, 4, 8, 16, 32, 64, 128, 256, 512],
            residual_channels: 32,
            skip_channels: 64,
            n_classes: 256,
            hop_length: 200,
            cond_channels: 80,
        }
    }
}

impl VocoderConfig {
    pub fn validate(&self) -> Result<(), VocoderError> {
        if self.n_layers == 0
            || self.kernel_size == 0
            || self.residual_channels == 0
            || self.skip_channels == 0
            || self.hop_length == 0
            || self.cond_channels == 0
        {
            return Err(VocoderError::BadConfig("all sizes must be positive".into()));
        }
        if self.dilation_cycle.is_empty() || self.dilation_cycle.contains(&0) {
            return Err(VocoderError::BadConfig(
                "dilation cycle must be non-empty and positive".into(),
            ));
        }
        if self.n_layers % self.dilation_cycle.len() != 0 {
            return Err(VocoderError::BadConfig(format!(
                "n_layers {} is not a whole number of {}-long dilation cycles",
                self.n_layers,
                self.dilation_cycle.len()
            )));
        }
        if self.n_classes != 256 {
            return Err(VocoderError::BadConfig(
                "n_classes must be 256 for 8-bit mu-law output".into(),
            ));
        }
        Ok(())
    }

    /// Per-layer dilations: the cycle repeated to cover every layer.
    pub fn dilations(&self) -> Vec<usize> {
        (0..self.n_layers)
            .map(|l| self.dilation_cycle[l % self.dilation_cycle.len()])
            .collect()
    }
}

/// Number of past samples (including the current one) that can influence
/// one output: `1 + (kernel_size - 1) * sum(dilations)`.
pub fn receptive_field(cfg: &VocoderConfig) -> usize {
    1 + (cfg.kernel_size - 1) * cfg.dilations().iter().sum::<usize>()
}

/// Per-sample conditioning features aligned with the audio, `N x cond`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningTrack {
    pub features: Matrix,
}

impl ConditioningTrack {
    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }
}

/// Nearest-frame upsampling: every mel frame is repeated `hop` times.
pub fn upsample_conditioning(mel: &Matrix, hop: usize) -> ConditioningTrack {
    assert!(hop > 0, "hop must be positive");
    let mut features = Matrix::zeros(mel.rows() * hop, mel.cols());
    for t in 0..mel.rows() {
        for i in 0..hop {
            features.row_mut(t * hop + i).copy_from_slice(mel.row(t));
        }
    }
    ConditioningTrack { features }
}
