//! Parameter layout, teacher-forced forward pass, and the categorical loss.

use super::{ConditioningTrack, VocoderConfig, VocoderError};
use crate::linalg::Matrix;
use crate::nn::sigmoid;
use crate::tensor::{init_uniform, ParameterStore, Tensor};

/// Shapes of every trainable tensor.
pub(crate) fn shapes(cfg: &VocoderConfig) -> Vec<(String, Vec<usize>)> {
    let r = cfg.residual_channels;
    let s = cfg.skip_channels;
    let c = cfg.cond_channels;
    let k = cfg.kernel_size;
    let mut v: Vec<(String, Vec<usize>)> = vec![("embed".into(), vec![cfg.n_classes, r])];
    for l in 0..cfg.n_layers {
        v.push((format!("layer{l}.w_f"), vec![r, k, r]));
        v.push((format!("layer{l}.w_g"), vec![r, k, r]));
        v.push((format!("layer{l}.c_f"), vec![r, c]));
        v.push((format!("layer{l}.c_g"), vec![r, c]));
        v.push((format!("layer{l}.b_f"), vec![r]));
        v.push((format!("layer{l}.b_g"), vec![r]));
        v.push((format!("layer{l}.w_res"), vec![r, r]));
        v.push((format!("layer{l}.b_res"), vec![r]));
        v.push((format!("layer{l}.w_skip"), vec![s, r]));
        v.push((format!("layer{l}.b_skip"), vec![s]));
    }
    v.push(("head.w1".into(), vec![s, s]));
    v.push(("head.b1".into(), vec![s]));
    v.push(("head.w2".into(), vec![cfg.n_classes, s]));
    v.push(("head.b2".into(), vec![cfg.n_classes]));
    v
}

/// Seeded uniform(-0.05, 0.05) initialization.
pub fn init_vocoder_params(
    cfg: &VocoderConfig,
    seed: u64,
) -> Result<ParameterStore, VocoderError> {
    cfg.validate()?;
    let shapes = shapes(cfg);
    let refs: Vec<(&str, Vec<usize>)> = shapes
        .iter()
        .map(|(n, d)| (n.as_str(), d.clone()))
        .collect();
    Ok(init_uniform(seed, &refs))
}

pub(crate) fn zero_grads(cfg: &VocoderConfig) -> ParameterStore {
    let mut store = ParameterStore::new(0);
    for (name, dims) in shapes(cfg) {
        store.insert(&name, Tensor::zeros(&dims));
    }
    store
}

/// Dilated causal gate pre-activation at one position.
///
/// `taps[j]` is the residual-stream row at `t - d*(kernel-1-j)`, or `None`
/// before the start of the signal. Accumulation order (bias, taps oldest
/// to newest, then conditioning) is fixed so teacher-forced and
/// incremental evaluation agree bitwise.
pub(crate) fn gate_pre(
    w: &Tensor,
    b: &[f64],
    c_proj: &Tensor,
    cond_row: &[f64],
    taps: &[Option<&[f64]>],
) -> Vec<f64> {
    let r_out = w.dims[0];
    let k = w.dims[1];
    let r_in = w.dims[2];
    debug_assert_eq!(taps.len(), k);
    let mut pre = b.to_vec();
    for (j, tap) in taps.iter().enumerate() {
        if let Some(x) = tap {
            for out in 0..r_out {
                let row = &w.data[(out * k + j) * r_in..(out * k + j + 1) * r_in];
                pre[out] += crate::linalg::dot(row, x);
            }
        }
    }
    for out in 0..r_out {
        pre[out] += crate::linalg::dot(c_proj.row(out), cond_row);
    }
    pre
}

/// Forward intermediates for one teacher-forced pass.
pub struct VocoderTape {
    pub(crate) cfg: VocoderConfig,
    pub(crate) fingerprint: u64,
    pub(crate) codes: Vec<u8>,
    pub(crate) cond: Matrix,
    /// Residual stream entering each layer; `streams[0]` is the shifted
    /// input embedding, `streams[l]` feeds layer l.
    pub(crate) streams: Vec<Matrix>,
    pub(crate) pre_f: Vec<Matrix>,
    pub(crate) pre_g: Vec<Matrix>,
    pub(crate) skip_acc: Matrix,
    pub(crate) h1: Matrix,
    pub(crate) logits: Matrix,
}

pub(crate) fn fingerprint(params: &ParameterStore) -> u64 {
    let mut h: u64 = 1469598103934665603;
    for (name, t) in params.iter() {
        for b in name.bytes() {
            h = (h ^ b as u64).wrapping_mul(1099511628211);
        }
        for &d in &t.dims {
            h = (h ^ d as u64).wrapping_mul(1099511628211);
        }
        for &v in &t.data {
            h = (h ^ v.to_bits()).wrapping_mul(1099511628211);
        }
    }
    h
}

/// Teacher-forced forward pass: logits at position t see codes strictly
/// before t (the input stream is the one-sample-shifted code embedding)
/// plus the conditioning row at t.
pub fn vocoder_forward(
    codes: &[u8],
    cond: &ConditioningTrack,
    params: &ParameterStore,
    cfg: &VocoderConfig,
) -> Result<(Matrix, VocoderTape), VocoderError> {
    cfg.validate()?;
    let n = codes.len();
    if n == 0 {
        return Err(VocoderError::ShapeMismatch("empty code sequence".into()));
    }
    if cond.len() != n {
        return Err(VocoderError::LengthMismatch {
            what: "conditioning track",
            expected: n,
            actual: cond.len(),
        });
    }
    if cond.features.cols() != cfg.cond_channels {
        return Err(VocoderError::ShapeMismatch(format!(
            "conditioning has {} channels, config says {}",
            cond.features.cols(),
            cfg.cond_channels
        )));
    }
    let r = cfg.residual_channels;
    let embed = params.get("embed");

    // Causal shift: position t consumes the embedding of code t-1.
    let mut x = Matrix::zeros(n, r);
    for t in 1..n {
        x.row_mut(t).copy_from_slice(embed.row(codes[t - 1] as usize));
    }

    let dilations = cfg.dilations();
    let mut streams = Vec::with_capacity(cfg.n_layers);
    let mut pre_f_all = Vec::with_capacity(cfg.n_layers);
    let mut pre_g_all = Vec::with_capacity(cfg.n_layers);
    let mut skip_acc = Matrix::zeros(n, cfg.skip_channels);

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

        let mut pre_f = Matrix::zeros(n, r);
        let mut pre_g = Matrix::zeros(n, r);
        let mut next = Matrix::zeros(n, r);
        for t in 0..n {
            let taps: Vec<Option<&[f64]>> = (0..cfg.kernel_size)
                .map(|j| {
                    let offset = d * (cfg.kernel_size - 1 - j);
                    if t >= offset {
                        Some(x.row(t - offset))
                    } else {
                        None
                    }
                })
                .collect();
            let cond_row = cond.features.row(t);
            let pf = gate_pre(w_f, b_f, c_f, cond_row, &taps);
            let pg = gate_pre(w_g, b_g, c_g, cond_row, &taps);
            let next_row = next.row_mut(t);
            for i in 0..r {
                let z = pf[i].tanh() * sigmoid(pg[i]);
                next_row[i] = z;
            }
            pre_f.row_mut(t).copy_from_slice(&pf);
            pre_g.row_mut(t).copy_from_slice(&pg);
        }
        // next currently holds z; apply skip and residual projections.
        for t in 0..n {
            let z = next.row(t).to_vec();
            let skip_row = skip_acc.row_mut(t);
            for (o, so) in skip_row.iter_mut().enumerate() {
                *so += crate::linalg::dot(w_skip.row(o), &z) + b_skip[o];
            }
            let next_row = next.row_mut(t);
            for o in 0..r {
                next_row[o] = x[(t, o)] + crate::linalg::dot(w_res.row(o), &z) + b_res[o];
            }
        }
        streams.push(x);
        pre_f_all.push(pre_f);
        pre_g_all.push(pre_g);
        x = next;
    }

    // Output head over the summed skips.
    let w1 = params.get("head.w1");
    let b1 = &params.get("head.b1").data;
    let w2 = params.get("head.w2");
    let b2 = &params.get("head.b2").data;
    let mut h1 = Matrix::zeros(n, cfg.skip_channels);
    let mut logits = Matrix::zeros(n, cfg.n_classes);
    for t in 0..n {
        let s = skip_acc.row(t);
        let h_row = h1.row_mut(t);
        for o in 0..cfg.skip_channels {
            h_row[o] = (crate::linalg::dot(w1.row(o), s) + b1[o]).tanh();
        }
        let h_copy = h1.row(t).to_vec();
        let l_row = logits.row_mut(t);
        for o in 0..cfg.n_classes {
            l_row[o] = crate::linalg::dot(w2.row(o), &h_copy) + b2[o];
        }
    }

    let tape = VocoderTape {
        cfg: cfg.clone(),
        fingerprint: fingerprint(params),
        codes: codes.to_vec(),
        cond: cond.features.clone(),
        streams,
        pre_f: pre_f_all,
        pre_g: pre_g_all,
        skip_acc,
        h1,
        logits: logits.clone(),
    };
    Ok((logits, tape))
}

/// Mean cross-entropy in nats over positions.
pub fn vocoder_loss(logits: &Matrix, target_codes: &[u8]) -> Result<f64, VocoderError> {
    if logits.rows() != target_codes.len() {
        return Err(VocoderError::ShapeMismatch(format!(
            "{} logit rows vs {} targets",
            logits.rows(),
            target_codes.len()
        )));
    }
    if logits.rows() == 0 {
        return Err(VocoderError::ShapeMismatch("empty logits".into()));
    }
    let mut total = 0.0;
    for (t, &code) in target_codes.iter().enumerate() {
        let row = logits.row(t);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
        total += lse - row[code as usize];
    }
    Ok(total / target_codes.len() as f64)
}
