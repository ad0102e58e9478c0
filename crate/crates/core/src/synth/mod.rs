//! Toy embedding-conditioned attention sequence-to-sequence mel
//! synthesizer.
//!
//! A deliberate miniaturization of the usual attention TTS stack: one
//! bidirectional gated-recurrent encoder layer, a single-cell decoder with
//! location-sensitive additive attention, a two-layer prenet, and linear
//! mel/stop heads. Speaker and language embeddings are concatenated to the
//! encoder context rows; the speaker vector is an input (never trained)
//! while the two-row language table is a trained parameter.
//!
//! Gradients are exact and hand-derived; [`backward`] is checked against
//! central finite differences in the tests.

mod backward;
mod forward;
mod model;
mod train;

pub use backward::{loss, backward};
pub use forward::{attend, condition, embed_inputs, encode, forward, TrainingTape};
pub use model::init_params;
pub use train::{train, TrainItem, TrainOptions};

use crate::linalg::Matrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("phoneme id {id} outside inventory of {size}")]
    IdOutOfRange { id: usize, size: usize },
    #[error("dimension mismatch for {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("tape does not match the parameter store it is replayed against")]
    StaleTape,
    #[error("backward requires a teacher-forced tape")]
    NotTeacherForced,
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error("empty input sequence")]
    EmptyInput,
    #[error("empty dataset")]
    EmptyDataset,
}

/// Width hyperparameters. `encoder_dim` is the total bidirectional width
/// and must be even.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub phoneme_embed_dim: usize,
    pub encoder_dim: usize,
    pub decoder_dim: usize,
    pub attention_dim: usize,
    pub speaker_dim: usize,
    pub language_dim: usize,
    pub n_mels: usize,
    pub max_decoder_steps: usize,
    pub stop_threshold: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            phoneme_embed_dim: 32,
            encoder_dim: 32,
            decoder_dim: 64,
            attention_dim: 32,
            speaker_dim: 128,
            language_dim: 4,
            n_mels: 80,
            max_decoder_steps: 400,
            stop_threshold: 0.5,
        }
    }
}

/// Location-feature convolution over the previous alignment: fixed kernel
/// width and channel count.
pub const LOCATION_KERNEL: usize = 31;
pub const LOCATION_CHANNELS: usize = 8;

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let dims = [
            self.phoneme_embed_dim,
            self.encoder_dim,
            self.decoder_dim,
            self.attention_dim,
            self.speaker_dim,
            self.language_dim,
            self.n_mels,
            self.max_decoder_steps,
        ];
        if dims.iter().any(|&d| d == 0) {
            return Err(SynthError::BadConfig("all dims must be >= 1".into()));
        }
        if self.encoder_dim % 2 != 0 {
            return Err(SynthError::BadConfig(
                "encoder_dim must be even (bidirectional halves)".into(),
            ));
        }
        if !(self.stop_threshold > 0.0 && self.stop_threshold < 1.0) {
            return Err(SynthError::BadConfig(
                "stop_threshold must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Width of one embedded input row: phoneme embedding plus the 7-D mark.
    pub fn input_dim(&self) -> usize {
        self.phoneme_embed_dim + 7
    }

    /// Width of one conditioned context row.
    pub fn context_dim(&self) -> usize {
        self.encoder_dim + self.speaker_dim + self.language_dim
    }
}

/// Encoder context rows, `T x encoder_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderOutput {
    pub context: Matrix,
}

/// Encoder context with the speaker and language embeddings appended to
/// every row.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedContext {
    pub context: Matrix,
    pub encoder_dim: usize,
}

/// Synthesizer outputs for one utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    /// `T_out x n_mels` predicted log-mel frames.
    pub mel: Matrix,
    /// Stop probabilities per output frame, in (0, 1).
    pub stop_probs: Vec<f64>,
    /// `T_out x T_in` attention weights; every row sums to 1.
    pub alignments: Matrix,
}

#[cfg(test)]
mod tests;
