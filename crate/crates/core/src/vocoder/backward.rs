//! Exact backpropagation through the dilated causal stack.

use super::net::{fingerprint, zero_grads, VocoderTape};
use super::VocoderError;
use crate::linalg::Matrix;
use crate::nn::{add_assign, sigmoid};
use crate::tensor::ParameterStore;

/// Gradients of [`super::vocoder_loss`] over a teacher-forced tape with
/// respect to every parameter tensor.
pub fn vocoder_backward(
    tape: &VocoderTape,
    params: &ParameterStore,
    target_codes: &[u8],
) -> Result<ParameterStore, VocoderError> {
    if tape.fingerprint != fingerprint(params) {
        return Err(VocoderError::StaleTape);
    }
    let cfg = &tape.cfg;
    let n = tape.logits.rows();
    if target_codes.len() != n {
        return Err(VocoderError::ShapeMismatch(format!(
            "{n} logit rows vs {} targets",
            target_codes.len()
        )));
    }
    let r = cfg.residual_channels;
    let s = cfg.skip_channels;
    let mut grads = zero_grads(cfg);

    // d loss / d logits = (softmax - onehot) / N
    let mut d_logits = Matrix::zeros(n, cfg.n_classes);
    for t in 0..n {
        let row = tape.logits.row(t);
        let sm = crate::nn::softmax(row);
        let out = d_logits.row_mut(t);
        for (o, &p) in sm.iter().enumerate() {
            out[o] = p / n as f64;
        }
        out[target_codes[t] as usize] -= 1.0 / n as f64;
    }

    // Head backward.
    let w1 = params.get("head.w1");
    let w2 = params.get("head.w2");
    let mut g_skip = Matrix::zeros(n, s);
    for t in 0..n {
        let dl = d_logits.row(t);
        let h = tape.h1.row(t);
        let sk = tape.skip_acc.row(t);
        let mut g_h1 = vec![0.0; s];
        for o in 0..cfg.n_classes {
            let g = dl[o];
            if g == 0.0 {
                continue;
            }
            grads.get_mut("head.b2").data[o] += g;
            let w2_grad = grads.get_mut("head.w2");
            for i in 0..s {
                w2_grad.data[o * s + i] += g * h[i];
            }
            for (gh, &w) in g_h1.iter_mut().zip(w2.row(o)) {
                *gh += g * w;
            }
        }
        let g_skip_row = g_skip.row_mut(t);
        for i in 0..s {
            let g_pre = g_h1[i] * (1.0 - h[i] * h[i]);
            grads.get_mut("head.b1").data[i] += g_pre;
            let w1_grad = grads.get_mut("head.w1");
            for j in 0..s {
                w1_grad.data[i * s + j] += g_pre * sk[j];
            }
            for (gs, &w) in g_skip_row.iter_mut().zip(w1.row(i)) {
                *gs += g_pre * w;
            }
        }
    }

    // Layer stack backward. g_x is the gradient with respect to the
    // residual stream leaving the current layer; the head reads only the
    // skip sum, so it starts at zero.
    let dilations = cfg.dilations();
    let mut g_x = Matrix::zeros(n, r);
    for l in (0..cfg.n_layers).rev() {
        let d = dilations[l];
        let x = &tape.streams[l];
        let pre_f = &tape.pre_f[l];
        let pre_g = &tape.pre_g[l];
        let w_f = params.get(&format!("layer{l}.w_f")).clone();
        let w_g = params.get(&format!("layer{l}.w_g")).clone();
        let w_res = params.get(&format!("layer{l}.w_res")).clone();
        let w_skip = params.get(&format!("layer{l}.w_skip")).clone();

        let mut g_x_prev = Matrix::zeros(n, r);
        for t in 0..n {
            // Residual pass-through.
            add_assign(g_x_prev.row_mut(t), g_x.row(t));

            // z gradient from both the residual and skip projections.
            let mut g_z = vec![0.0; r];
            let gx = g_x.row(t);
            let gs = g_skip.row(t);
            let tf: Vec<f64> = pre_f.row(t).iter().map(|&v| v.tanh()).collect();
            let sg: Vec<f64> = pre_g.row(t).iter().map(|&v| sigmoid(v)).collect();
            let z: Vec<f64> = tf.iter().zip(&sg).map(|(a, b)| a * b).collect();

            for o in 0..r {
                let g = gx[o];
                if g != 0.0 {
                    grads.get_mut(&format!("layer{l}.b_res")).data[o] += g;
                    let wg = grads.get_mut(&format!("layer{l}.w_res"));
                    for i in 0..r {
                        wg.data[o * r + i] += g * z[i];
                    }
                    for (gz, &w) in g_z.iter_mut().zip(w_res.row(o)) {
                        *gz += g * w;
                    }
                }
            }
            for o in 0..s {
                let g = gs[o];
                if g != 0.0 {
                    grads.get_mut(&format!("layer{l}.b_skip")).data[o] += g;
                    let wg = grads.get_mut(&format!("layer{l}.w_skip"));
                    for i in 0..r {
                        wg.data[o * r + i] += g * z[i];
                    }
                    for (gz, &w) in g_z.iter_mut().zip(w_skip.row(o)) {
                        *gz += g * w;
                    }
                }
            }

            // Through the gate: z = tanh(pre_f) * sigmoid(pre_g).
            let cond_row = tape.cond.row(t);
            let mut g_pf = vec![0.0; r];
            let mut g_pg = vec![0.0; r];
            for i in 0..r {
                g_pf[i] = g_z[i] * sg[i] * (1.0 - tf[i] * tf[i]);
                g_pg[i] = g_z[i] * tf[i] * sg[i] * (1.0 - sg[i]);
            }
            add_assign(
                &mut grads.get_mut(&format!("layer{l}.b_f")).data,
                &g_pf,
            );
            add_assign(
                &mut grads.get_mut(&format!("layer{l}.b_g")).data,
                &g_pg,
            );
            {
                let cg = grads.get_mut(&format!("layer{l}.c_f"));
                crate::nn::outer_acc(cg, &g_pf, cond_row);
            }
            {
                let cg = grads.get_mut(&format!("layer{l}.c_g"));
                crate::nn::outer_acc(cg, &g_pg, cond_row);
            }

            // Dilated taps.
            for j in 0..cfg.kernel_size {
                let offset = d * (cfg.kernel_size - 1 - j);
                if t < offset {
                    continue;
                }
                let src = t - offset;
                let x_src = x.row(src);
                let wf_grad = grads.get_mut(&format!("layer{l}.w_f"));
                for o in 0..r {
                    let g = g_pf[o];
                    if g == 0.0 {
                        continue;
                    }
                    let base = (o * cfg.kernel_size + j) * r;
                    for i in 0..r {
                        wf_grad.data[base + i] += g * x_src[i];
                    }
                }
                let wg_grad = grads.get_mut(&format!("layer{l}.w_g"));
                for o in 0..r {
                    let g = g_pg[o];
                    if g == 0.0 {
                        continue;
                    }
                    let base = (o * cfg.kernel_size + j) * r;
                    for i in 0..r {
                        wg_grad.data[base + i] += g * x_src[i];
                    }
                }
                let gxp = g_x_prev.row_mut(src);
                for o in 0..r {
                    let (gf, gg) = (g_pf[o], g_pg[o]);
                    let base = (o * cfg.kernel_size + j) * r;
                    for i in 0..r {
                        gxp[i] += gf * w_f.data[base + i] + gg * w_g.data[base + i];
                    }
                }
            }
        }
        g_x = g_x_prev;
    }

    // Input embedding: position t carried the embedding of codes[t-1].
    for t in 1..n {
        let embed_grad = grads.get_mut("embed");
        add_assign(embed_grad.row_mut(tape.codes[t - 1] as usize), g_x.row(t));
    }

    Ok(grads)
}
