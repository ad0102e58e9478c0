//! Loss and exact hand-derived backpropagation through the full
//! teacher-forced synthesizer graph: heads, attention (including the
//! location-convolution recurrence), decoder cell, prenet, conditioning,
//! bidirectional encoder, and the embedding tables.

use super::forward::TrainingTape;
use super::model::{fingerprint, gru_backward, zero_grads};
use super::{SynthError, SynthOutput, LOCATION_CHANNELS, LOCATION_KERNEL};
use crate::linalg::Matrix;
use crate::nn::{add_assign, matvec_transpose, outer_acc, softmax_backward};
use crate::tensor::ParameterStore;

/// Mean-squared error over mel entries plus binary cross-entropy over the
/// stop probabilities (both means), summed.
pub fn loss(
    out: &SynthOutput,
    target_mel: &Matrix,
    target_stops: &[f64],
) -> Result<f64, SynthError> {
    if out.mel.rows() != target_mel.rows() || out.mel.cols() != target_mel.cols() {
        return Err(SynthError::ShapeMismatch(format!(
            "mel {}x{} vs target {}x{}",
            out.mel.rows(),
            out.mel.cols(),
            target_mel.rows(),
            target_mel.cols()
        )));
    }
    if out.stop_probs.len() != target_stops.len() {
        return Err(SynthError::ShapeMismatch(format!(
            "stop probs {} vs targets {}",
            out.stop_probs.len(),
            target_stops.len()
        )));
    }
    let n = (out.mel.rows() * out.mel.cols()) as f64;
    let mse: f64 = out
        .mel
        .data()
        .iter()
        .zip(target_mel.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n;
    let u = out.stop_probs.len() as f64;
    let bce: f64 = out
        .stop_probs
        .iter()
        .zip(target_stops)
        .map(|(&p, &y)| {
            let p = p.clamp(1e-12, 1.0 - 1e-12);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum::<f64>()
        / u;
    Ok(mse + bce)
}

/// Exact gradients of [`loss`] with respect to every parameter tensor.
///
/// The tape must come from a teacher-forced [`super::forward`] run against
/// the same parameter store.
pub fn backward(
    tape: &TrainingTape,
    params: &ParameterStore,
    target_mel: &Matrix,
    target_stops: &[f64],
) -> Result<ParameterStore, SynthError> {
    if tape.fingerprint != fingerprint(params) {
        return Err(SynthError::StaleTape);
    }
    if !tape.teacher_forced {
        return Err(SynthError::NotTeacherForced);
    }
    let cfg = &tape.cfg;
    let out = &tape.output;
    // Reuse the shape validation.
    loss(out, target_mel, target_stops)?;

    let u_steps = out.mel.rows();
    let t_len = tape.ctx.context.rows();
    let n_mel = (u_steps * cfg.n_mels) as f64;
    let ctx_w = cfg.context_dim();
    let pre_dim = cfg.decoder_dim;
    let pad = LOCATION_KERNEL / 2;

    let mut grads = zero_grads(cfg);
    let mut g_ctx = Matrix::zeros(t_len, ctx_w);

    // Gradients carried backwards across decoder steps.
    let mut g_h_carry = vec![0.0; cfg.decoder_dim];
    let mut g_align_carry = vec![0.0; t_len];
    let mut g_summary_carry = vec![0.0; ctx_w];

    let mel_w = params.get("head.mel.w");
    let stop_w = params.get("head.stop.w");
    let w_c = params.get("att.w_c");
    let w_f = params.get("att.w_f");
    let w_q = params.get("att.w_q");
    let v = params.get("att.v");
    let conv = params.get("att.conv");

    for u in (0..u_steps).rev() {
        let step = &tape.steps[u];
        // Head gradients.
        let d_mel: Vec<f64> = out
            .mel
            .row(u)
            .iter()
            .zip(target_mel.row(u))
            .map(|(a, b)| 2.0 * (a - b) / n_mel)
            .collect();
        let d_stop = (out.stop_probs[u] - target_stops[u]) / u_steps as f64;

        let h_new = &step.cell.h;
        let mut head_in = h_new.clone();
        head_in.extend_from_slice(&step.summary);

        outer_acc(grads.get_mut("head.mel.w"), &d_mel, &head_in);
        add_assign(&mut grads.get_mut("head.mel.b").data, &d_mel);
        outer_acc(grads.get_mut("head.stop.w"), &[d_stop], &head_in);
        grads.get_mut("head.stop.b").data[0] += d_stop;

        let mut g_head_in = matvec_transpose(mel_w, &d_mel);
        for (g, &w) in g_head_in.iter_mut().zip(&stop_w.data) {
            *g += d_stop * w;
        }
        let mut g_h: Vec<f64> = g_head_in[..cfg.decoder_dim].to_vec();
        add_assign(&mut g_h, &g_h_carry);
        let mut g_sum: Vec<f64> = g_head_in[cfg.decoder_dim..].to_vec();
        add_assign(&mut g_sum, &g_summary_carry);

        // summary = sum_t align[t] * ctx[t]
        let align = &step.attend.align;
        let mut g_align = vec![0.0; t_len];
        for t in 0..t_len {
            g_align[t] = crate::linalg::dot(&g_sum, tape.ctx.context.row(t));
            crate::linalg::axpy(align[t], &g_sum, g_ctx.row_mut(t));
        }
        add_assign(&mut g_align, &g_align_carry);

        // align = softmax(energies)
        let g_e = softmax_backward(align, &g_align);

        // energies[t] = v . tanh(q_proj + c_proj + f_proj + b)
        let mut g_a_sum = vec![0.0; cfg.attention_dim];
        let mut g_loc = Matrix::zeros(t_len, LOCATION_CHANNELS);
        for t in 0..t_len {
            let ta = step.attend.tanh_a.row(t);
            let mut g_a = vec![0.0; cfg.attention_dim];
            for i in 0..cfg.attention_dim {
                grads.get_mut("att.v").data[i] += g_e[t] * ta[i];
                g_a[i] = g_e[t] * v.data[i] * (1.0 - ta[i] * ta[i]);
            }
            add_assign(&mut g_a_sum, &g_a);
            outer_acc(grads.get_mut("att.w_c"), &g_a, tape.ctx.context.row(t));
            add_assign(g_ctx.row_mut(t), &matvec_transpose(w_c, &g_a));
            outer_acc(grads.get_mut("att.w_f"), &g_a, step.attend.loc.row(t));
            g_loc.row_mut(t).copy_from_slice(&matvec_transpose(w_f, &g_a));
        }
        outer_acc(grads.get_mut("att.w_q"), &g_a_sum, h_new);
        add_assign(&mut g_h, &matvec_transpose(w_q, &g_a_sum));
        add_assign(&mut grads.get_mut("att.b").data, &g_a_sum);

        // Location convolution over the previous alignment.
        let mut g_align_prev = vec![0.0; t_len];
        for t in 0..t_len {
            for l in 0..LOCATION_CHANNELS {
                let g = g_loc[(t, l)];
                if g == 0.0 {
                    continue;
                }
                grads.get_mut("att.conv_b").data[l] += g;
                for k in 0..LOCATION_KERNEL {
                    let src = t as isize + k as isize - pad as isize;
                    if src >= 0 && (src as usize) < t_len {
                        let s = src as usize;
                        let conv_grad = grads.get_mut("att.conv");
                        conv_grad.data[l * LOCATION_KERNEL + k] += g * step.align_prev[s];
                        g_align_prev[s] += g * conv.at(l, k);
                    }
                }
            }
        }

        // Decoder cell.
        let mut cell_in = step.p2.clone();
        cell_in.extend_from_slice(&step.summary_prev);
        let (g_cell_in, g_h_prev) =
            gru_backward(params, &mut grads, "dec", &cell_in, &step.h_prev, &step.cell, &g_h);

        // Prenet.
        let g_p2 = &g_cell_in[..pre_dim];
        let g_q2: Vec<f64> = g_p2
            .iter()
            .zip(&step.p2)
            .map(|(&g, &p)| g * (1.0 - p * p))
            .collect();
        outer_acc(grads.get_mut("pre.w2"), &g_q2, &step.p1);
        add_assign(&mut grads.get_mut("pre.b2").data, &g_q2);
        let g_p1 = matvec_transpose(params.get("pre.w2"), &g_q2);
        let g_q1: Vec<f64> = g_p1
            .iter()
            .zip(&step.p1)
            .map(|(&g, &p)| g * (1.0 - p * p))
            .collect();
        outer_acc(grads.get_mut("pre.w1"), &g_q1, &step.prev_frame);
        add_assign(&mut grads.get_mut("pre.b1").data, &g_q1);
        // The previous frame is teacher input: constant, no gradient flows.

        g_h_carry = g_h_prev;
        g_align_carry = g_align_prev;
        g_summary_carry = g_cell_in[pre_dim..].to_vec();
    }

    // Split accumulated context gradients into encoder and language parts;
    // the speaker columns are input, not parameters.
    let half = cfg.encoder_dim / 2;
    let lang_start = cfg.encoder_dim + cfg.speaker_dim;
    {
        let lang_grad = grads.get_mut("lang");
        let row = lang_grad.row_mut(tape.language.id());
        for t in 0..t_len {
            add_assign(row, &g_ctx.row(t)[lang_start..]);
        }
    }

    // Bidirectional encoder backward.
    let mut g_x = Matrix::zeros(t_len, cfg.input_dim());
    let zeros = vec![0.0; half];
    let mut carry = vec![0.0; half];
    for t in (0..t_len).rev() {
        let mut g_h: Vec<f64> = g_ctx.row(t)[..half].to_vec();
        add_assign(&mut g_h, &carry);
        let h_prev = if t == 0 {
            &zeros
        } else {
            &tape.encoder.fwd[t - 1].h
        };
        let (gx, ghp) = gru_backward(
            params,
            &mut grads,
            "enc.fwd",
            tape.embedded.row(t),
            h_prev,
            &tape.encoder.fwd[t],
            &g_h,
        );
        add_assign(g_x.row_mut(t), &gx);
        carry = ghp;
    }
    let mut carry = vec![0.0; half];
    for t in 0..t_len {
        let mut g_h: Vec<f64> = g_ctx.row(t)[half..cfg.encoder_dim].to_vec();
        add_assign(&mut g_h, &carry);
        let h_prev = if t + 1 == t_len {
            &zeros
        } else {
            &tape.encoder.bwd[t + 1].h
        };
        let (gx, ghp) = gru_backward(
            params,
            &mut grads,
            "enc.bwd",
            tape.embedded.row(t),
            h_prev,
            &tape.encoder.bwd[t],
            &g_h,
        );
        add_assign(g_x.row_mut(t), &gx);
        carry = ghp;
    }

    // Embedding table rows (the one-hot mark columns carry no parameters).
    let e_dim = cfg.phoneme_embed_dim;
    for (t, &pid) in tape.token_ids.iter().enumerate() {
        let embed_grad = grads.get_mut("embed");
        add_assign(embed_grad.row_mut(pid), &g_x.row(t)[..e_dim]);
    }

    Ok(grads)
}
