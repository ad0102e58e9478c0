//! Autoregressive sample-by-sample generation.

use super::net::gate_pre;
use super::{ConditioningTrack, VocoderConfig, VocoderError};
use crate::dsp::{mu_law_decode, Waveform, MU_DEFAULT};
use crate::nn::sigmoid;
use crate::tensor::ParameterStore;
use rand::Rng;

/// Generates one sample per conditioning row.
///
/// Each step evaluates the stack incrementally over the stored per-layer
/// histories (identical arithmetic to the teacher-forced forward pass),
/// samples a mu-law code from `softmax(logits / temperature)` with the
/// seeded generator, and decodes it. `temperature == 0` takes the argmax,
/// ties resolving to the lowest code index.
pub fn generate(
    cond: &ConditioningTrack,
    params: &ParameterStore,
    cfg: &VocoderConfig,
    sample_rate: u32,
    seed: u64,
    temperature: f64,
) -> Result<Waveform, VocoderError> {
    cfg.validate()?;
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(VocoderError::BadTemperature(temperature));
    }
    if cond.is_empty() {
        return Err(VocoderError::ShapeMismatch("empty conditioning".into()));
    }
    if cond.features.cols() != cfg.cond_channels {
        return Err(VocoderError::ShapeMismatch(format!(
            "conditioning has {} channels, config says {}",
            cond.features.cols(),
            cfg.cond_channels
        )));
    }
    let n = cond.len();
    let r = cfg.residual_channels;
    let s = cfg.skip_channels;
    let dilations = cfg.dilations();
    let embed = params.get("embed");
    let w1 = params.get("head.w1");
    let b1 = &params.get("head.b1").data;
    let w2 = params.get("head.w2");
    let b2 = &params.get("head.b2").data;

    let mut rng = crate::tensor::seeded_rng(seed);
    // Full per-layer histories; generation is sequential by nature, the
    // histories just avoid quadratic recomputation.
    let mut hist: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(n); cfg.n_layers + 1];
    let mut codes: Vec<u8> = Vec::with_capacity(n);
    let mut samples: Vec<f64> = Vec::with_capacity(n);

    for t in 0..n {
        let x0 = if t == 0 {
            vec![0.0; r]
        } else {
            embed.row(codes[t - 1] as usize).to_vec()
        };
        hist[0].push(x0);
        let cond_row = cond.features.row(t);

        let mut skip_t = vec![0.0; s];
        for (l, &d) in dilations.iter().enumerate() {
            let w_f = params.get(&format!("layer{l}.w_f"));
            let w_g = params.get(&format!("layer{l}.w_g"));
            let c_f = params.get(&format!("layer{l}.c_f"));
            let c_g = params.get(&format!("layer{l}.c_g"));
            let b_f = &params.get(&format!("layer{l}.b_f")).data;
            let b_g = &params.get(&format!("layer{l}.b_g")).data;
            let w_res = params.get(&format!("layer{l}.w_res"));
            let b_res = &params.get(&format!("layer{l}.b_res")).data;
            let w_skip = params.get(&format!("layer{l}.w_skip"));
            let b_skip = &params.get(&format!("layer{l}.b_skip")).data;

            let taps: Vec<Option<&[f64]>> = (0..cfg.kernel_size)
                .map(|j| {
                    let offset = d * (cfg.kernel_size - 1 - j);
                    if t >= offset {
                        Some(hist[l][t - offset].as_slice())
                    } else {
                        None
                    }
                })
                .collect();
            let pf = gate_pre(w_f, b_f, c_f, cond_row, &taps);
            let pg = gate_pre(w_g, b_g, c_g, cond_row, &taps);
            let z: Vec<f64> = pf
                .iter()
                .zip(&pg)
                .map(|(&a, &b)| a.tanh() * sigmoid(b))
                .collect();
            for (o, sk) in skip_t.iter_mut().enumerate() {
                *sk += crate::linalg::dot(w_skip.row(o), &z) + b_skip[o];
            }
            let x_in = &hist[l][t];
            let mut next = vec![0.0; r];
            for o in 0..r {
                next[o] = x_in[o] + crate::linalg::dot(w_res.row(o), &z) + b_res[o];
            }
            hist[l + 1].push(next);
        }

        let mut logits = vec![0.0; cfg.n_classes];
        let h1: Vec<f64> = (0..s)
            .map(|o| (crate::linalg::dot(w1.row(o), &skip_t) + b1[o]).tanh())
            .collect();
        for (o, lg) in logits.iter_mut().enumerate() {
            *lg = crate::linalg::dot(w2.row(o), &h1) + b2[o];
        }

        let code = if temperature == 0.0 {
            argmax_lowest(&logits)
        } else {
            let scaled: Vec<f64> = logits.iter().map(|&v| v / temperature).collect();
            let probs = crate::nn::softmax(&scaled);
            sample_categorical(&probs, rng.gen_range(0.0..1.0))
        };
        codes.push(code as u8);
        samples.push(mu_law_decode(code as u32, MU_DEFAULT)?);
    }

    Ok(Waveform::new(samples, sample_rate)?)
}

fn argmax_lowest(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn sample_categorical(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
