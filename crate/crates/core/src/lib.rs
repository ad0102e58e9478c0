//! Cross-lingual multi-speaker TTS toolkit.
//!
//! A desk-scale pipeline covering the full chain from text to audio:
//!
//! - [`frontend`]: Mandarin pinyin and English ARPABET parsing into a
//!   shared phoneme inventory with tone/stress marks.
//! - [`embedding`]: speaker-embedding ingestion, L2/whitening
//!   normalization, cosine trial scoring, EER, and 2-D projection.
//! - [`dsp`]: mu-law codec, STFT/mel analysis, Griffin-Lim phase
//!   reconstruction, and silence-based utterance segmentation.
//! - [`synth`]: a toy embedding-conditioned attention sequence-to-sequence
//!   mel synthesizer with hand-rolled exact backpropagation.
//! - [`vocoder`]: a toy WaveNet-style dilated causal vocoder with 8-bit
//!   mu-law output and autoregressive sampling.
//! - [`eval`]: MOS rating validation/aggregation, listening-pool
//!   construction, EER report tables, and pipeline orchestration.
//!
//! Everything is `f64`, single-threaded, and deterministic under its seed
//! arguments; model parameters live in named-tensor stores that serialize
//! to a simple binary checkpoint format.

pub mod checkpoint;
pub mod config;
pub mod dsp;
pub mod embedding;
pub mod eval;
pub mod frontend;
pub mod linalg;
pub mod optim;
pub mod nn;
pub mod synth;
pub mod tensor;
pub mod vocoder;

mod eigen;

pub use linalg::Matrix;
pub use tensor::{ParameterStore, Tensor};
