//! Forward pass: embedding, encoding, conditioning, attention, decoding.

use super::model::{gru_step, GruStep};
use super::{
    ConditionedContext, EncoderOutput, SynthConfig, SynthError, SynthOutput, LOCATION_CHANNELS,
    LOCATION_KERNEL,
};
use crate::frontend::{InputSequence, Language, SharedPhonemeInventory};
use crate::linalg::Matrix;
use crate::nn::{matvec, sigmoid, softmax};
use crate::tensor::ParameterStore;

/// Embeds a token sequence: row t is the phoneme embedding concatenated
/// with the 7-D mark one-hot.
pub fn embed_inputs(
    seq: &InputSequence,
    params: &ParameterStore,
    cfg: &SynthConfig,
) -> Result<Matrix, SynthError> {
    let table = params.get("embed");
    let inventory = SharedPhonemeInventory::global().len();
    let e_dim = cfg.phoneme_embed_dim;
    if table.dims != vec![inventory, e_dim] {
        return Err(SynthError::ShapeMismatch(format!(
            "embedding table dims {:?}",
            table.dims
        )));
    }
    let t_len = seq.len();
    let mut out = Matrix::zeros(t_len, cfg.input_dim());
    for (t, tok) in seq.tokens().iter().enumerate() {
        if tok.phoneme_id >= inventory {
            return Err(SynthError::IdOutOfRange {
                id: tok.phoneme_id,
                size: inventory,
            });
        }
        let row = out.row_mut(t);
        row[..e_dim].copy_from_slice(table.row(tok.phoneme_id));
        row[e_dim..].copy_from_slice(&crate::frontend::encode_mark(tok.mark));
    }
    Ok(out)
}

pub(crate) struct EncoderTape {
    pub fwd: Vec<GruStep>,
    pub bwd: Vec<GruStep>,
}

pub(crate) fn encode_with_tape(
    embedded: &Matrix,
    params: &ParameterStore,
    cfg: &SynthConfig,
) -> (EncoderOutput, EncoderTape) {
    let t_len = embedded.rows();
    let half = cfg.encoder_dim / 2;
    let mut fwd = Vec::with_capacity(t_len);
    let mut h = vec![0.0; half];
    for t in 0..t_len {
        let step = gru_step(params, "enc.fwd", embedded.row(t), &h);
        h = step.h.clone();
        fwd.push(step);
    }
    let mut bwd = vec![None; t_len];
    let mut hb = vec![0.0; half];
    for t in (0..t_len).rev() {
        let step = gru_step(params, "enc.bwd", embedded.row(t), &hb);
        hb = step.h.clone();
        bwd[t] = Some(step);
    }
    let bwd: Vec<GruStep> = bwd.into_iter().map(|s| s.unwrap()).collect();

    let mut context = Matrix::zeros(t_len, cfg.encoder_dim);
    for t in 0..t_len {
        let row = context.row_mut(t);
        row[..half].copy_from_slice(&fwd[t].h);
        row[half..].copy_from_slice(&bwd[t].h);
    }
    (EncoderOutput { context }, EncoderTape { fwd, bwd })
}

/// Bidirectional single-layer gated-recurrent encoding. Row t holds the
/// forward state at t followed by the backward state at t.
pub fn encode(
    embedded: &Matrix,
    params: &ParameterStore,
    cfg: &SynthConfig,
) -> Result<EncoderOutput, SynthError> {
    if embedded.rows() == 0 {
        return Err(SynthError::EmptyInput);
    }
    if embedded.cols() != cfg.input_dim() {
        return Err(SynthError::DimensionMismatch {
            what: "embedded input width",
            expected: cfg.input_dim(),
            actual: embedded.cols(),
        });
    }
    Ok(encode_with_tape(embedded, params, cfg).0)
}

/// Appends the speaker vector and the language embedding to every encoder
/// context row.
pub fn condition(
    enc: &EncoderOutput,
    speaker: &[f64],
    language: Language,
    params: &ParameterStore,
    cfg: &SynthConfig,
) -> Result<ConditionedContext, SynthError> {
    if speaker.len() != cfg.speaker_dim {
        return Err(SynthError::DimensionMismatch {
            what: "speaker embedding",
            expected: cfg.speaker_dim,
            actual: speaker.len(),
        });
    }
    if enc.context.cols() != cfg.encoder_dim {
        return Err(SynthError::DimensionMismatch {
            what: "encoder context width",
            expected: cfg.encoder_dim,
            actual: enc.context.cols(),
        });
    }
    let lang_row = params.get("lang").row(language.id()).to_vec();
    let t_len = enc.context.rows();
    let mut context = Matrix::zeros(t_len, cfg.context_dim());
    for t in 0..t_len {
        let row = context.row_mut(t);
        row[..cfg.encoder_dim].copy_from_slice(enc.context.row(t));
        row[cfg.encoder_dim..cfg.encoder_dim + cfg.speaker_dim].copy_from_slice(speaker);
        row[cfg.encoder_dim + cfg.speaker_dim..].copy_from_slice(&lang_row);
    }
    Ok(ConditionedContext {
        context,
        encoder_dim: cfg.encoder_dim,
    })
}

/// Per-step attention intermediates kept for backprop.
pub(crate) struct AttendTape {
    /// T x LOCATION_CHANNELS location features.
    pub loc: Matrix,
    /// T x attention_dim tanh outputs of the energy MLP.
    pub tanh_a: Matrix,
    pub align: Vec<f64>,
}

pub(crate) fn attend_with_tape(
    query: &[f64],
    ctx: &ConditionedContext,
    prev_align: &[f64],
    params: &ParameterStore,
    cfg: &SynthConfig,
) -> (Vec<f64>, Vec<f64>, AttendTape) {
    let t_len = ctx.context.rows();
    let pad = LOCATION_KERNEL / 2;
    let conv = params.get("att.conv");
    let conv_b = &params.get("att.conv_b").data;

    // 1-D convolution of the previous alignment, "same" padding.
    let mut loc = Matrix::zeros(t_len, LOCATION_CHANNELS);
    for t in 0..t_len {
        let row = loc.row_mut(t);
        for (l, r) in row.iter_mut().enumerate() {
            let mut acc = conv_b[l];
            for k in 0..LOCATION_KERNEL {
                let src = t as isize + k as isize - pad as isize;
                if src >= 0 && (src as usize) < t_len {
                    acc += conv.at(l, k) * prev_align[src as usize];
                }
            }
            *r = acc;
        }
    }

    let w_q = params.get("att.w_q");
    let w_c = params.get("att.w_c");
    let w_f = params.get("att.w_f");
    let bias = &params.get("att.b").data;
    let v = &params.get("att.v").data;

    let q_proj = matvec(w_q, query);
    let mut tanh_a = Matrix::zeros(t_len, cfg.attention_dim);
    let mut energies = vec![0.0; t_len];
    for t in 0..t_len {
        let c_proj = matvec(w_c, ctx.context.row(t));
        let f_proj = matvec(w_f, loc.row(t));
        let row = tanh_a.row_mut(t);
        let mut e = 0.0;
        for i in 0..cfg.attention_dim {
            let a = (q_proj[i] + c_proj[i] + f_proj[i] + bias[i]).tanh();
            row[i] = a;
            e += v[i] * a;
        }
        energies[t] = e;
    }
    let align = softmax(&energies);

    let mut summary = vec![0.0; ctx.context.cols()];
    for t in 0..t_len {
        crate::linalg::axpy(align[t], ctx.context.row(t), &mut summary);
    }
    (
        align.clone(),
        summary,
        AttendTape { loc, tanh_a, align },
    )
}

/// Location-sensitive additive attention step.
///
/// Returns the normalized alignment over context rows and the
/// alignment-weighted context summary.
pub fn attend(
    query: &[f64],
    ctx: &ConditionedContext,
    prev_align: &[f64],
    params: &ParameterStore,
    cfg: &SynthConfig,
) -> Result<(Vec<f64>, Vec<f64>), SynthError> {
    if query.len() != cfg.decoder_dim {
        return Err(SynthError::DimensionMismatch {
            what: "attention query",
            expected: cfg.decoder_dim,
            actual: query.len(),
        });
    }
    if prev_align.len() != ctx.context.rows() {
        return Err(SynthError::DimensionMismatch {
            what: "previous alignment",
            expected: ctx.context.rows(),
            actual: prev_align.len(),
        });
    }
    let (align, summary, _) = attend_with_tape(query, ctx, prev_align, params, cfg);
    Ok((align, summary))
}

/// Everything the backward pass needs to replay one teacher-forced run.
pub struct TrainingTape {
    pub(crate) cfg: SynthConfig,
    pub(crate) fingerprint: u64,
    pub(crate) language: Language,
    pub(crate) token_ids: Vec<usize>,
    pub(crate) embedded: Matrix,
    pub(crate) encoder: EncoderTape,
    pub(crate) ctx: ConditionedContext,
    pub(crate) steps: Vec<DecoderStepTape>,
    pub(crate) output: SynthOutput,
    pub(crate) teacher_forced: bool,
}

pub(crate) struct DecoderStepTape {
    pub prev_frame: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub summary_prev: Vec<f64>,
    pub align_prev: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub cell: GruStep,
    pub attend: AttendTape,
    pub summary: Vec<f64>,
}

/// Runs the decoder. With `teacher_mel` the loop is teacher-forced to the
/// target length; without it the loop free-runs until the stop gate fires
/// (`sigmoid(stop) > stop_threshold`) or `max_decoder_steps` is reached.
pub fn forward(
    seq: &InputSequence,
    speaker: &[f64],
    language: Language,
    params: &ParameterStore,
    cfg: &SynthConfig,
    teacher_mel: Option<&Matrix>,
) -> Result<(SynthOutput, TrainingTape), SynthError> {
    cfg.validate()?;
    if let Some(tm) = teacher_mel {
        if tm.cols() != cfg.n_mels {
            return Err(SynthError::ShapeMismatch(format!(
                "teacher mel has {} columns, config says {}",
                tm.cols(),
                cfg.n_mels
            )));
        }
        if tm.rows() == 0 {
            return Err(SynthError::ShapeMismatch("teacher mel is empty".into()));
        }
    }
    let embedded = embed_inputs(seq, params, cfg)?;
    let (enc, enc_tape) = encode_with_tape(&embedded, params, cfg);
    let ctx = condition(&enc, speaker, language, params, cfg)?;
    let t_len = seq.len();

    let max_steps = teacher_mel.map_or(cfg.max_decoder_steps, |tm| tm.rows());
    let mel_w = params.get("head.mel.w");
    let mel_b = &params.get("head.mel.b").data;
    let stop_w = params.get("head.stop.w");
    let stop_b = params.get("head.stop.b").data[0];

    let mut steps: Vec<DecoderStepTape> = Vec::new();
    let mut mel_rows: Vec<Vec<f64>> = Vec::new();
    let mut stop_probs: Vec<f64> = Vec::new();
    let mut align_rows: Vec<Vec<f64>> = Vec::new();

    let mut h_dec = vec![0.0; cfg.decoder_dim];
    let mut align_prev = vec![0.0; t_len];
    align_prev[0] = 1.0;
    let mut summary_prev = vec![0.0; cfg.context_dim()];

    for u in 0..max_steps {
        let prev_frame: Vec<f64> = if u == 0 {
            vec![0.0; cfg.n_mels]
        } else if let Some(tm) = teacher_mel {
            tm.row(u - 1).to_vec()
        } else {
            mel_rows[u - 1].clone()
        };

        let mut p1 = matvec(params.get("pre.w1"), &prev_frame);
        for (v, b) in p1.iter_mut().zip(&params.get("pre.b1").data) {
            *v = (*v + b).tanh();
        }
        let mut p2 = matvec(params.get("pre.w2"), &p1);
        for (v, b) in p2.iter_mut().zip(&params.get("pre.b2").data) {
            *v = (*v + b).tanh();
        }

        let mut cell_in = p2.clone();
        cell_in.extend_from_slice(&summary_prev);
        let cell = gru_step(params, "dec", &cell_in, &h_dec);
        let h_new = cell.h.clone();

        let (align, summary, att_tape) =
            attend_with_tape(&h_new, &ctx, &align_prev, params, cfg);

        let mut head_in = h_new.clone();
        head_in.extend_from_slice(&summary);
        let mut mel_row = matvec(mel_w, &head_in);
        for (v, b) in mel_row.iter_mut().zip(mel_b) {
            *v += b;
        }
        let stop_logit = crate::linalg::dot(&stop_w.data, &head_in) + stop_b;
        let stop_prob = sigmoid(stop_logit);

        steps.push(DecoderStepTape {
            prev_frame,
            p1,
            p2,
            summary_prev: summary_prev.clone(),
            align_prev: align_prev.clone(),
            h_prev: h_dec.clone(),
            cell,
            attend: att_tape,
            summary: summary.clone(),
        });
        mel_rows.push(mel_row);
        stop_probs.push(stop_prob);
        align_rows.push(align.clone());

        h_dec = h_new;
        align_prev = align;
        summary_prev = summary;

        if teacher_mel.is_none() && stop_prob > cfg.stop_threshold {
            break;
        }
    }

    let output = SynthOutput {
        mel: Matrix::from_rows(&mel_rows),
        stop_probs,
        alignments: Matrix::from_rows(&align_rows),
    };
    let tape = TrainingTape {
        cfg: *cfg,
        fingerprint: super::model::fingerprint(params),
        language,
        token_ids: seq.tokens().iter().map(|t| t.phoneme_id).collect(),
        embedded,
        encoder: enc_tape,
        ctx,
        steps,
        output: output.clone(),
        teacher_forced: teacher_mel.is_some(),
    };
    Ok((output, tape))
}
