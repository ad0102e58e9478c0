//! Full-batch Adam training on a micro dataset.

use super::{backward, forward, loss, SynthConfig, SynthError};
use crate::frontend::{InputSequence, Language};
use crate::linalg::Matrix;
use crate::optim::{Adam, AdamConfig};
use crate::tensor::ParameterStore;

/// One training utterance: token sequence, conditioning, and target mel.
#[derive(Debug, Clone)]
pub struct TrainItem {
    pub seq: InputSequence,
    pub speaker: Vec<f64>,
    pub language: Language,
    pub target_mel: Matrix,
}

#[derive(Debug, Clone, Copy)]
pub struct TrainOptions {
    pub adam: AdamConfig,
    pub steps: usize,
    pub seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            adam: AdamConfig::default(),
            steps: 2000,
            seed: 0,
        }
    }
}

/// Stop targets for a teacher-forced run: 0 everywhere, 1 on the last frame.
pub(crate) fn stop_targets(frames: usize) -> Vec<f64> {
    let mut y = vec![0.0; frames];
    if frames > 0 {
        y[frames - 1] = 1.0;
    }
    y
}

/// Teacher-forced full-batch training. Gradients are accumulated over the
/// dataset in order and averaged, so runs are bit-reproducible; the
/// returned curve holds the pre-update loss of every step.
///
/// The seed is part of the options for interface stability; the current
/// schedule (full batch, no dropout) has no stochastic choices left, so
/// two runs agree bitwise regardless of it.
pub fn train(
    dataset: &[TrainItem],
    params: &mut ParameterStore,
    cfg: &SynthConfig,
    options: &TrainOptions,
) -> Result<Vec<f64>, SynthError> {
    if dataset.is_empty() {
        return Err(SynthError::EmptyDataset);
    }
    cfg.validate()?;
    let mut opt = Adam::new(options.adam, params);
    let mut curve = Vec::with_capacity(options.steps);
    let scale = 1.0 / dataset.len() as f64;
    for _ in 0..options.steps {
        let mut total_loss = 0.0;
        let mut grads = params.zeros_like();
        for item in dataset {
            let (out, tape) = forward(
                &item.seq,
                &item.speaker,
                item.language,
                params,
                cfg,
                Some(&item.target_mel),
            )?;
            let stops = stop_targets(item.target_mel.rows());
            total_loss += loss(&out, &item.target_mel, &stops)?;
            let g = backward(&tape, params, &item.target_mel, &stops)?;
            grads.add_scaled(&g, scale);
        }
        curve.push(total_loss * scale);
        opt.update(params, &grads);
    }
    Ok(curve)
}
