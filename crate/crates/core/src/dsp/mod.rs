//! Audio primitives: mu-law codec, STFT/mel analysis, Griffin-Lim
//! reconstruction, and silence-based utterance segmentation.

mod griffin_lim;
mod mel;
mod mulaw;
mod segment;
mod stft;
mod wav;

pub use griffin_lim::{griffin_lim, GriffinLimResult};
pub use mel::{mel_to_linear, melspectrogram, read_mel, write_mel, MelFilterbank, MelSpectrogram};
pub use mulaw::{decode_codes, encode_waveform, mu_law_decode, mu_law_encode, MU_DEFAULT};
pub use segment::{segment_on_silence, SegmentConfig};
pub use stft::{hann_window, sine_tone, stft};
pub(crate) use stft::{istft, stft_complex};
pub use wav::{read_wav, write_wav};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DspError {
    #[error("sample value {0} outside [-1, 1]")]
    OutOfRange(f64),
    #[error("mu-law code {code} exceeds mu = {mu}")]
    CodeOutOfRange { code: u32, mu: u32 },
    #[error("audio too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("empty audio")]
    EmptyAudio,
    #[error("filterbank built for fft_size {fb_fft}/{fb_rate} Hz, input uses {fft}/{rate} Hz")]
    MismatchedFilterbank {
        fb_fft: usize,
        fb_rate: u32,
        fft: usize,
        rate: u32,
    },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("wav format: {0}")]
    WavFormat(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Mono audio with samples in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    /// Validates finiteness, range and a positive sample rate.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, DspError> {
        if sample_rate == 0 {
            return Err(DspError::BadParams("sample_rate must be positive".into()));
        }
        for &s in &samples {
            if !s.is_finite() || s.abs() > 1.0 {
                return Err(DspError::OutOfRange(s));
            }
        }
        Ok(Waveform {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WindowKind {
    Hann,
}

/// Short-time analysis parameters. Frames start every `hop_length`
/// samples, cover `frame_length` samples, and are zero-padded to
/// `fft_size` before the transform; the signal itself is never padded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftParams {
    pub frame_length: usize,
    pub hop_length: usize,
    pub fft_size: usize,
    pub window: WindowKind,
}

impl StftParams {
    pub fn new(frame_length: usize, hop_length: usize, fft_size: usize) -> Result<Self, DspError> {
        let p = StftParams {
            frame_length,
            hop_length,
            fft_size,
            window: WindowKind::Hann,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DspError> {
        if self.hop_length == 0 || self.frame_length == 0 || self.fft_size == 0 {
            return Err(DspError::BadParams("lengths must be positive".into()));
        }
        if !(self.hop_length <= self.frame_length && self.frame_length <= self.fft_size) {
            return Err(DspError::BadParams(format!(
                "need hop <= frame <= fft_size, got {}/{}/{}",
                self.hop_length, self.frame_length, self.fft_size
            )));
        }
        Ok(())
    }

    /// Number of one-sided spectrum bins.
    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Frame count for a signal of `len` samples (no padding).
    pub fn frames_for(&self, len: usize) -> Option<usize> {
        if len < self.frame_length {
            None
        } else {
            Some(1 + (len - self.frame_length) / self.hop_length)
        }
    }
}
