//! Parameter layout, initialization, and the gated recurrent cell.

use super::{SynthConfig, LOCATION_CHANNELS, LOCATION_KERNEL};
use crate::frontend::SharedPhonemeInventory;
use crate::nn::{matvec, matvec_transpose, outer_acc, sigmoid};
use crate::tensor::{init_uniform, ParameterStore, Tensor};

/// Shapes of every trainable tensor, in a fixed order.
pub(crate) fn shapes(cfg: &SynthConfig) -> Vec<(String, Vec<usize>)> {
    let inventory = SharedPhonemeInventory::global().len();
    let input = cfg.input_dim();
    let half = cfg.encoder_dim / 2;
    let ctx = cfg.context_dim();
    let pre = cfg.decoder_dim;
    let cell_in = pre + ctx;
    let head_in = cfg.decoder_dim + ctx;

    let mut v: Vec<(String, Vec<usize>)> = vec![
        ("embed".into(), vec![inventory, cfg.phoneme_embed_dim]),
        ("lang".into(), vec![2, cfg.language_dim]),
    ];
    v.extend(gru_shapes("enc.fwd", input, half));
    v.extend(gru_shapes("enc.bwd", input, half));
    v.push(("pre.w1".into(), vec![pre, cfg.n_mels]));
    v.push(("pre.b1".into(), vec![pre]));
    v.push(("pre.w2".into(), vec![pre, pre]));
    v.push(("pre.b2".into(), vec![pre]));
    v.extend(gru_shapes("dec", cell_in, cfg.decoder_dim));
    v.push(("att.w_q".into(), vec![cfg.attention_dim, cfg.decoder_dim]));
    v.push(("att.w_c".into(), vec![cfg.attention_dim, ctx]));
    v.push(("att.w_f".into(), vec![cfg.attention_dim, LOCATION_CHANNELS]));
    v.push(("att.b".into(), vec![cfg.attention_dim]));
    v.push(("att.v".into(), vec![cfg.attention_dim]));
    v.push(("att.conv".into(), vec![LOCATION_CHANNELS, LOCATION_KERNEL]));
    v.push(("att.conv_b".into(), vec![LOCATION_CHANNELS]));
    v.push(("head.mel.w".into(), vec![cfg.n_mels, head_in]));
    v.push(("head.mel.b".into(), vec![cfg.n_mels]));
    v.push(("head.stop.w".into(), vec![1, head_in]));
    v.push(("head.stop.b".into(), vec![1]));
    v
}

fn gru_shapes(prefix: &str, input: usize, hidden: usize) -> Vec<(String, Vec<usize>)> {
    let mut v = Vec::new();
    for gate in ["r", "z", "n"] {
        v.push((format!("{prefix}.w_{gate}"), vec![hidden, input]));
        v.push((format!("{prefix}.u_{gate}"), vec![hidden, hidden]));
        v.push((format!("{prefix}.b_{gate}"), vec![hidden]));
    }
    v
}

/// Seeded uniform(-0.05, 0.05) initialization of the full parameter set.
pub fn init_params(cfg: &SynthConfig, seed: u64) -> Result<ParameterStore, super::SynthError> {
    cfg.validate()?;
    let shapes = shapes(cfg);
    let refs: Vec<(&str, Vec<usize>)> = shapes
        .iter()
        .map(|(n, d)| (n.as_str(), d.clone()))
        .collect();
    Ok(init_uniform(seed, &refs))
}

/// One gated-recurrent step's recorded intermediates.
#[derive(Debug, Clone)]
pub(crate) struct GruStep {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub n: Vec<f64>,
    /// `U_n h_prev`, reused by the backward pass.
    pub un_h: Vec<f64>,
    pub h: Vec<f64>,
}

/// r = sigma(W_r x + U_r h + b_r), z likewise,
/// n = tanh(W_n x + r .* (U_n h) + b_n), h' = (1 - z) .* n + z .* h.
pub(crate) fn gru_step(
    params: &ParameterStore,
    prefix: &str,
    x: &[f64],
    h_prev: &[f64],
) -> GruStep {
    let pre_r = gate_pre(params, prefix, "r", x, h_prev);
    let pre_z = gate_pre(params, prefix, "z", x, h_prev);
    let r: Vec<f64> = pre_r.iter().map(|&v| sigmoid(v)).collect();
    let z: Vec<f64> = pre_z.iter().map(|&v| sigmoid(v)).collect();
    let un_h = matvec(params.get(&format!("{prefix}.u_n")), h_prev);
    let wn_x = matvec(params.get(&format!("{prefix}.w_n")), x);
    let b_n = &params.get(&format!("{prefix}.b_n")).data;
    let n: Vec<f64> = (0..r.len())
        .map(|i| (wn_x[i] + r[i] * un_h[i] + b_n[i]).tanh())
        .collect();
    let h: Vec<f64> = (0..r.len())
        .map(|i| (1.0 - z[i]) * n[i] + z[i] * h_prev[i])
        .collect();
    GruStep { r, z, n, un_h, h }
}

fn gate_pre(params: &ParameterStore, prefix: &str, gate: &str, x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut pre = matvec(params.get(&format!("{prefix}.w_{gate}")), x);
    let uh = matvec(params.get(&format!("{prefix}.u_{gate}")), h);
    let b = &params.get(&format!("{prefix}.b_{gate}")).data;
    for i in 0..pre.len() {
        pre[i] += uh[i] + b[i];
    }
    pre
}

/// Backward through one GRU step. Accumulates parameter gradients into
/// `grads` and returns `(dL/dx, dL/dh_prev)`.
pub(crate) fn gru_backward(
    params: &ParameterStore,
    grads: &mut ParameterStore,
    prefix: &str,
    x: &[f64],
    h_prev: &[f64],
    step: &GruStep,
    g_h: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let hidden = g_h.len();
    let mut g_x = vec![0.0; x.len()];
    let mut g_h_prev = vec![0.0; hidden];

    // h' = (1 - z) n + z h_prev
    let mut g_pre_z = vec![0.0; hidden];
    let mut g_q = vec![0.0; hidden]; // pre-tanh of n
    for i in 0..hidden {
        let gz = g_h[i] * (h_prev[i] - step.n[i]);
        g_pre_z[i] = gz * step.z[i] * (1.0 - step.z[i]);
        let gn = g_h[i] * (1.0 - step.z[i]);
        g_q[i] = gn * (1.0 - step.n[i] * step.n[i]);
        g_h_prev[i] += g_h[i] * step.z[i];
    }

    // n = tanh(W_n x + r .* (U_n h_prev) + b_n)
    let mut g_pre_r = vec![0.0; hidden];
    let mut g_un_h = vec![0.0; hidden];
    for i in 0..hidden {
        let gr = g_q[i] * step.un_h[i];
        g_pre_r[i] = gr * step.r[i] * (1.0 - step.r[i]);
        g_un_h[i] = g_q[i] * step.r[i];
    }

    let acc_gate = |grads: &mut ParameterStore,
                    gate: &str,
                    g_pre: &[f64],
                    g_x: &mut [f64],
                    g_h_prev: &mut [f64],
                    through_u: bool| {
        let w_name = format!("{prefix}.w_{gate}");
        let u_name = format!("{prefix}.u_{gate}");
        let b_name = format!("{prefix}.b_{gate}");
        outer_acc(grads.get_mut(&w_name), g_pre, x);
        crate::nn::add_assign(&mut grads.get_mut(&b_name).data, g_pre);
        crate::nn::add_assign(g_x, &matvec_transpose(params.get(&w_name), g_pre));
        if through_u {
            outer_acc(grads.get_mut(&u_name), g_pre, h_prev);
            crate::nn::add_assign(g_h_prev, &matvec_transpose(params.get(&u_name), g_pre));
        }
    };

    acc_gate(grads, "r", &g_pre_r, &mut g_x, &mut g_h_prev, true);
    acc_gate(grads, "z", &g_pre_z, &mut g_x, &mut g_h_prev, true);
    // The n gate's U path runs through un_h (gated by r), not g_q directly.
    acc_gate(grads, "n", &g_q, &mut g_x, &mut g_h_prev, false);
    outer_acc(grads.get_mut(&format!("{prefix}.u_n")), &g_un_h, h_prev);
    crate::nn::add_assign(
        &mut g_h_prev,
        &matvec_transpose(params.get(&format!("{prefix}.u_n")), &g_un_h),
    );

    (g_x, g_h_prev)
}

/// Fingerprint binding tapes to the exact parameter values they recorded;
/// replaying a tape against a modified store is an error, not a wrong
/// gradient.
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

/// Zero-filled gradient store matching [`shapes`].
pub(crate) fn zero_grads(cfg: &SynthConfig) -> ParameterStore {
    let mut store = ParameterStore::new(0);
    for (name, dims) in shapes(cfg) {
        store.insert(&name, Tensor::zeros(&dims));
    }
    store
}
