//! Teacher-forced Adam training on mu-law codes.

use super::{
    upsample_conditioning, vocoder_backward, vocoder_forward, vocoder_loss, VocoderConfig,
    VocoderError,
};
use crate::dsp::{encode_waveform, Waveform};
use crate::linalg::Matrix;
use crate::optim::{Adam, AdamConfig};
use crate::tensor::ParameterStore;

#[derive(Debug, Clone, Copy)]
pub struct VocoderTrainOptions {
    pub adam: AdamConfig,
    pub steps: usize,
    pub seed: u64,
}

impl Default for VocoderTrainOptions {
    fn default() -> Self {
        VocoderTrainOptions {
            adam: AdamConfig::default(),
            steps: 300,
            seed: 0,
        }
    }
}

/// Teacher-forced training of the vocoder on one utterance.
///
/// The audio length must equal `mel frames * hop_length`. Returns the
/// per-step cross-entropy curve (pre-update). With `steps == 0` the
/// parameters are untouched. The schedule is deterministic; the seed is
/// carried for interface stability.
pub fn train_vocoder(
    audio: &Waveform,
    mel: &Matrix,
    cfg: &VocoderConfig,
    params: &mut ParameterStore,
    options: &VocoderTrainOptions,
) -> Result<Vec<f64>, VocoderError> {
    cfg.validate()?;
    if mel.cols() != cfg.cond_channels {
        return Err(VocoderError::ShapeMismatch(format!(
            "mel has {} bands, config expects {}",
            mel.cols(),
            cfg.cond_channels
        )));
    }
    let expected = mel.rows() * cfg.hop_length;
    if audio.len() != expected {
        return Err(VocoderError::LengthMismatch {
            what: "audio",
            expected,
            actual: audio.len(),
        });
    }
    let codes = encode_waveform(audio)?;
    let cond = upsample_conditioning(mel, cfg.hop_length);

    let mut opt = Adam::new(options.adam, params);
    let mut curve = Vec::with_capacity(options.steps);
    for _ in 0..options.steps {
        let (logits, tape) = vocoder_forward(&codes, &cond, params, cfg)?;
        curve.push(vocoder_loss(&logits, &codes)?);
        let grads = vocoder_backward(&tape, params, &codes)?;
        opt.update(params, &grads);
    }
    Ok(curve)
}
