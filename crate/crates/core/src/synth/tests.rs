use super::train::stop_targets;
use super::*;
use crate::frontend::{
    build_input_sequence, encode_mark, InputSequence, Language, PhonemeToken, ToneStressMark,
};
use crate::linalg::Matrix;
use crate::tensor::seeded_rng;
use rand::Rng;

fn micro_config() -> SynthConfig {
    SynthConfig {
        phoneme_embed_dim: 4,
        encoder_dim: 6,
        decoder_dim: 5,
        attention_dim: 4,
        speaker_dim: 3,
        language_dim: 2,
        n_mels: 3,
        max_decoder_steps: 20,
        stop_threshold: 0.5,
    }
}

fn tokens(ids: &[usize]) -> InputSequence {
    let toks: Vec<PhonemeToken> = ids
        .iter()
        .map(|&phoneme_id| PhonemeToken {
            phoneme_id,
            mark: ToneStressMark::None,
        })
        .collect();
    InputSequence::new(toks, Language::English).unwrap()
}

fn random_mel(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = seeded_rng(seed);
    let mut m = Matrix::zeros(rows, cols);
    for v in m.data_mut() {
        *v = rng.gen_range(-1.0..1.0);
    }
    m
}

#[test]
fn config_validation_catches_bad_dims() {
    let mut cfg = micro_config();
    cfg.encoder_dim = 5;
    assert!(matches!(cfg.validate(), Err(SynthError::BadConfig(_))));
    let mut cfg = micro_config();
    cfg.stop_threshold = 1.0;
    assert!(matches!(cfg.validate(), Err(SynthError::BadConfig(_))));
    assert!(micro_config().validate().is_ok());
}

#[test]
fn embed_rows_are_embedding_plus_mark() {
    let mut cfg = micro_config();
    cfg.phoneme_embed_dim = 8;
    let params = init_params(&cfg, 1).unwrap();
    let seq = InputSequence::new(
        vec![PhonemeToken {
            phoneme_id: 5,
            mark: ToneStressMark::Tone2,
        }],
        Language::Mandarin,
    )
    .unwrap();
    let m = embed_inputs(&seq, &params, &cfg).unwrap();
    assert_eq!((m.rows(), m.cols()), (1, 15));
    assert_eq!(&m.row(0)[..8], params.get("embed").row(5));
    assert_eq!(&m.row(0)[8..], &encode_mark(ToneStressMark::Tone2));
}

#[test]
fn embed_same_phoneme_different_marks_differ_only_in_mark_columns() {
    let cfg = micro_config();
    let params = init_params(&cfg, 2).unwrap();
    let seq = InputSequence::new(
        vec![
            PhonemeToken {
                phoneme_id: 7,
                mark: ToneStressMark::Tone1,
            },
            PhonemeToken {
                phoneme_id: 7,
                mark: ToneStressMark::Tone4,
            },
        ],
        Language::Mandarin,
    )
    .unwrap();
    let m = embed_inputs(&seq, &params, &cfg).unwrap();
    let e = cfg.phoneme_embed_dim;
    assert_eq!(&m.row(0)[..e], &m.row(1)[..e]);
    assert_ne!(&m.row(0)[e..], &m.row(1)[e..]);
}

#[test]
fn encode_zero_params_give_zero_context() {
    let cfg = micro_config();
    let mut params = init_params(&cfg, 3).unwrap();
    for name in params.names().to_vec() {
        if name.starts_with("enc.") {
            for v in &mut params.get_mut(&name).data {
                *v = 0.0;
            }
        }
    }
    let seq = tokens(&[1, 2, 3, 4]);
    let embedded = embed_inputs(&seq, &params, &cfg).unwrap();
    let enc = encode(&embedded, &params, &cfg).unwrap();
    assert!(enc.context.data().iter().all(|&v| v == 0.0));
}

#[test]
fn encode_single_token_shape() {
    let cfg = micro_config();
    let params = init_params(&cfg, 4).unwrap();
    let seq = tokens(&[0]);
    let embedded = embed_inputs(&seq, &params, &cfg).unwrap();
    let enc = encode(&embedded, &params, &cfg).unwrap();
    assert_eq!((enc.context.rows(), enc.context.cols()), (1, cfg.encoder_dim));
}

#[test]
fn encode_mirrored_params_reverse_the_rows() {
    // Swapping the two directions' parameters and reversing the input
    // reverses the output rows, with the forward/backward halves swapped.
    let cfg = micro_config();
    let params = init_params(&cfg, 5).unwrap();
    let seq = tokens(&[3, 9, 1, 6, 2]);
    let embedded = embed_inputs(&seq, &params, &cfg).unwrap();
    let enc = encode(&embedded, &params, &cfg).unwrap();

    let mut mirrored = params.clone();
    for gate in ["r", "z", "n"] {
        for kind in ["w", "u", "b"] {
            let f = format!("enc.fwd.{kind}_{gate}");
            let b = format!("enc.bwd.{kind}_{gate}");
            let tf = mirrored.get(&f).clone();
            let tb = mirrored.get(&b).clone();
            mirrored.insert(&f, tb);
            mirrored.insert(&b, tf);
        }
    }
    let t_len = embedded.rows();
    let mut reversed = Matrix::zeros(t_len, embedded.cols());
    for t in 0..t_len {
        reversed
            .row_mut(t)
            .copy_from_slice(embedded.row(t_len - 1 - t));
    }
    let enc_rev = encode(&reversed, &mirrored, &cfg).unwrap();
    let half = cfg.encoder_dim / 2;
    for t in 0..t_len {
        let orig = enc.context.row(t_len - 1 - t);
        let rev = enc_rev.context.row(t);
        assert_eq!(&rev[..half], &orig[half..], "fwd half at {t}");
        assert_eq!(&rev[half..], &orig[..half], "bwd half at {t}");
    }
}

#[test]
fn condition_row_width_and_locality() {
    let cfg = SynthConfig {
        encoder_dim: 16,
        speaker_dim: 128,
        language_dim: 4,
        ..micro_config()
    };
    let params = init_params(&cfg, 6).unwrap();
    let seq = tokens(&[1, 2, 3]);
    let embedded = embed_inputs(&seq, &params, &cfg).unwrap();
    let enc = encode(&embedded, &params, &cfg).unwrap();

    let spk = vec![0.25; 128];
    let cond = condition(&enc, &spk, Language::English, &params, &cfg).unwrap();
    assert_eq!(cond.context.cols(), 148);

    // Zero speaker vector: speaker columns zero, encoder columns untouched.
    let zero = vec![0.0; 128];
    let cond0 = condition(&enc, &zero, Language::English, &params, &cfg).unwrap();
    for t in 0..3 {
        assert_eq!(&cond0.context.row(t)[..16], enc.context.row(t));
        assert!(cond0.context.row(t)[16..144].iter().all(|&v| v == 0.0));
    }

    // Different speakers, same text: only speaker columns differ.
    let spk_b = vec![-0.5; 128];
    let cond_b = condition(&enc, &spk_b, Language::English, &params, &cfg).unwrap();
    for t in 0..3 {
        assert_eq!(&cond.context.row(t)[..16], &cond_b.context.row(t)[..16]);
        assert_eq!(&cond.context.row(t)[144..], &cond_b.context.row(t)[144..]);
        assert_ne!(&cond.context.row(t)[16..144], &cond_b.context.row(t)[16..144]);
    }

    let bad = vec![0.0; 64];
    assert!(matches!(
        condition(&enc, &bad, Language::English, &params, &cfg),
        Err(SynthError::DimensionMismatch { .. })
    ));
}

#[test]
fn attend_uniform_when_energies_are_constant() {
    let cfg = micro_config();
    let mut params = init_params(&cfg, 7).unwrap();
    for name in params.names().to_vec() {
        if name.starts_with("att.") {
            for v in &mut params.get_mut(&name).data {
                *v = 0.0;
            }
        }
    }
    let seq = tokens(&[1, 2, 3, 4, 5]);
    let embedded = embed_inputs(&seq, &params, &cfg).unwrap();
    let enc = encode(&embedded, &params, &cfg).unwrap();
    let cond = condition(&enc, &[0.1, 0.2, 0.3], Language::English, &params, &cfg).unwrap();
    let query = vec![0.5; cfg.decoder_dim];
    let mut prev = vec![0.0; 5];
    prev[2] = 1.0;
    let (align, _) = attend(&query, &cond, &prev, &params, &cfg).unwrap();
    for &a in &align {
        assert!((a - 0.2).abs() < 1e-12);
    }
}

#[test]
fn attend_saturates_to_one_hot_and_returns_that_row() {
    let cfg = SynthConfig {
        attention_dim: 1,
        ..micro_config()
    };
    let mut params = init_params(&cfg, 8).unwrap();
    // Zero all attention parameters, then wire energy = 200 * tanh(ctx[t][0]).
    for name in params.names().to_vec() {
        if name.starts_with("att.") {
            for v in &mut params.get_mut(&name).data {
                *v = 0.0;
            }
        }
    }
    params.get_mut("att.v").data[0] = 200.0;
    params.get_mut("att.w_c").data[0] = 1.0;

    let seq = tokens(&[1, 2, 3]);
    let embedded = embed_inputs(&seq, &params, &cfg).unwrap();
    // Hand-build a context where only row 0 has a strong first column.
    let mut enc = encode(&embedded, &params, &cfg).unwrap();
    for t in 0..3 {
        enc.context.row_mut(t)[0] = if t == 0 { 100.0 } else { 0.0 };
    }
    let cond = condition(&enc, &[0.0; 3], Language::English, &params, &cfg).unwrap();
    let query = vec![0.0; cfg.decoder_dim];
    let prev = vec![1.0 / 3.0; 3];
    let (align, summary) = attend(&query, &cond, &prev, &params, &cfg).unwrap();
    assert!((align[0] - 1.0).abs() < 1e-6);
    assert!(align[1] < 1e-6 && align[2] < 1e-6);
    for (s, c) in summary.iter().zip(cond.context.row(0)) {
        assert!((s - c).abs() < 1e-6);
    }
    let row_sum: f64 = align.iter().sum();
    assert!((row_sum - 1.0).abs() < 1e-12);
}

#[test]
fn forward_teacher_forcing_matches_target_length() {
    let cfg = micro_config();
    let params = init_params(&cfg, 9).unwrap();
    let seq = tokens(&[2, 4, 6]);
    let target = random_mel(7, cfg.n_mels, 1);
    let (out, _) = forward(&seq, &[0.1, 0.2, 0.3], Language::English, &params, &cfg, Some(&target))
        .unwrap();
    assert_eq!(out.mel.rows(), 7);
    assert_eq!(out.stop_probs.len(), 7);
    assert_eq!(out.alignments.rows(), 7);
    for u in 0..7 {
        let s: f64 = out.alignments.row(u).iter().sum();
        assert!((s - 1.0).abs() < 1e-6);
        assert!(out.alignments.row(u).iter().all(|&a| a >= 0.0));
    }
}

#[test]
fn forward_free_running_stops_on_biased_stop_head() {
    let cfg = micro_config();
    let mut params = init_params(&cfg, 10).unwrap();
    params.get_mut("head.stop.b").data[0] = 10.0;
    let seq = tokens(&[2, 4, 6]);
    let (out, _) =
        forward(&seq, &[0.1, 0.2, 0.3], Language::English, &params, &cfg, None).unwrap();
    assert_eq!(out.mel.rows(), 1);
}

#[test]
fn forward_free_running_respects_max_steps() {
    let cfg = micro_config();
    let mut params = init_params(&cfg, 11).unwrap();
    params.get_mut("head.stop.b").data[0] = -10.0;
    let seq = tokens(&[2, 4, 6]);
    let (out, _) =
        forward(&seq, &[0.1, 0.2, 0.3], Language::English, &params, &cfg, None).unwrap();
    assert_eq!(out.mel.rows(), cfg.max_decoder_steps);
}

#[test]
fn forward_is_deterministic() {
    let cfg = micro_config();
    let params = init_params(&cfg, 12).unwrap();
    let seq = tokens(&[1, 3, 5, 7]);
    let target = random_mel(6, cfg.n_mels, 2);
    let run = || {
        forward(&seq, &[0.3, -0.1, 0.2], Language::Mandarin, &params, &cfg, Some(&target))
            .unwrap()
            .0
    };
    let a = run();
    let b = run();
    assert_eq!(a.mel, b.mel);
    assert_eq!(a.stop_probs, b.stop_probs);
    assert_eq!(a.alignments, b.alignments);
}

#[test]
fn loss_examples() {
    let target = random_mel(4, 3, 3);
    let eps = 1e-9;
    let mut stops = vec![eps; 4];
    stops[3] = 1.0 - eps;
    let out = SynthOutput {
        mel: target.clone(),
        stop_probs: stops,
        alignments: Matrix::zeros(4, 2),
    };
    let l = loss(&out, &target, &stop_targets(4)).unwrap();
    assert!(l < 1e-6, "loss = {l}");

    // Constant offset c: the MSE term is exactly c^2.
    let c = 0.37;
    let mut off = target.clone();
    for v in off.data_mut() {
        *v += c;
    }
    let out_off = SynthOutput {
        mel: off,
        stop_probs: out.stop_probs.clone(),
        alignments: Matrix::zeros(4, 2),
    };
    let l_off = loss(&out_off, &target, &stop_targets(4)).unwrap();
    assert!((l_off - l - c * c).abs() < 1e-9);

    // Doubling the error scales the MSE term by 4.
    let mut off2 = target.clone();
    for v in off2.data_mut() {
        *v += 2.0 * c;
    }
    let out_off2 = SynthOutput {
        mel: off2,
        stop_probs: out.stop_probs.clone(),
        alignments: Matrix::zeros(4, 2),
    };
    let l_off2 = loss(&out_off2, &target, &stop_targets(4)).unwrap();
    assert!((l_off2 - l - 4.0 * c * c).abs() < 1e-9);

    let bad = Matrix::zeros(5, 3);
    assert!(matches!(
        loss(&out, &bad, &stop_targets(4)),
        Err(SynthError::ShapeMismatch(_))
    ));
}

/// Central-difference gradient oracle over every parameter tensor.
///
/// The test point keeps the loss small (mel targets in [-0.5, 0.5] and a
/// positively biased stop head against all-ones stop targets) so the
/// difference quotient is far above float cancellation noise even for the
/// tiniest gradient entries; every path still carries gradient.
fn finite_difference_check(cfg: &SynthConfig, seed: u64) {
    let mut params = init_params(cfg, seed).unwrap();
    params.get_mut("head.stop.b").data[0] = 4.0;
    let seq = tokens(&[3, 11, 25]);
    let speaker: Vec<f64> = {
        let mut rng = seeded_rng(seed + 1);
        (0..cfg.speaker_dim).map(|_| rng.gen_range(-0.5..0.5)).collect()
    };
    let mut target = random_mel(5, cfg.n_mels, seed + 2);
    for v in target.data_mut() {
        *v *= 0.5;
    }
    let stops = vec![1.0; 5];

    let (_, tape) = forward(&seq, &speaker, Language::Mandarin, &params, cfg, Some(&target)).unwrap();
    let analytic = backward(&tape, &params, &target, &stops).unwrap();

    let h = 1e-4;
    let names = params.names().to_vec();
    for name in names {
        let len = params.get(&name).len();
        for i in 0..len {
            let orig = params.get(&name).data[i];
            params.get_mut(&name).data[i] = orig + h;
            let (out_p, _) =
                forward(&seq, &speaker, Language::Mandarin, &params, cfg, Some(&target)).unwrap();
            let lp = loss(&out_p, &target, &stops).unwrap();
            params.get_mut(&name).data[i] = orig - h;
            let (out_m, _) =
                forward(&seq, &speaker, Language::Mandarin, &params, cfg, Some(&target)).unwrap();
            let lm = loss(&out_m, &target, &stops).unwrap();
            params.get_mut(&name).data[i] = orig;

            let fd = (lp - lm) / (2.0 * h);
            let a = analytic.get(&name).data[i];
            let rel = (a - fd).abs() / (a.abs() + fd.abs()).max(1e-8);
            assert!(
                rel < 1e-4,
                "{name}[{i}]: analytic {a:.3e} vs fd {fd:.3e} (rel {rel:.3e})"
            );
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    finite_difference_check(&micro_config(), 42);
}

#[test]
fn gradients_vanish_at_self_targets() {
    let cfg = micro_config();
    let params = init_params(&cfg, 13).unwrap();
    let seq = tokens(&[1, 2, 3, 4]);
    let target = random_mel(5, cfg.n_mels, 4);
    let (out, tape) =
        forward(&seq, &[0.2, 0.1, -0.3], Language::English, &params, &cfg, Some(&target)).unwrap();
    // Soft targets equal to the model's own outputs: the loss gradient is
    // exactly zero everywhere even though the BCE itself is not.
    let grads = backward(&tape, &params, &out.mel, &out.stop_probs).unwrap();
    assert!(grads.max_abs() < 1e-8);
}

#[test]
fn unused_language_row_gets_zero_gradient() {
    let cfg = micro_config();
    let params = init_params(&cfg, 14).unwrap();
    let seq = tokens(&[5, 6]);
    let target = random_mel(4, cfg.n_mels, 5);
    let (_, tape) =
        forward(&seq, &[0.1, 0.1, 0.1], Language::English, &params, &cfg, Some(&target)).unwrap();
    let grads = backward(&tape, &params, &target, &stop_targets(4)).unwrap();
    let lang = grads.get("lang");
    assert!(lang.row(Language::Mandarin.id()).iter().all(|&g| g == 0.0));
    assert!(lang.row(Language::English.id()).iter().any(|&g| g != 0.0));
}

#[test]
fn backward_rejects_stale_tape() {
    let cfg = micro_config();
    let mut params = init_params(&cfg, 15).unwrap();
    let seq = tokens(&[1, 2]);
    let target = random_mel(3, cfg.n_mels, 6);
    let (_, tape) =
        forward(&seq, &[0.0, 0.0, 0.1], Language::English, &params, &cfg, Some(&target)).unwrap();
    params.get_mut("pre.b1").data[0] += 0.5;
    assert!(matches!(
        backward(&tape, &params, &target, &stop_targets(3)),
        Err(SynthError::StaleTape)
    ));
}

#[test]
fn backward_rejects_free_running_tape() {
    let cfg = micro_config();
    let params = init_params(&cfg, 16).unwrap();
    let seq = tokens(&[1, 2]);
    let (out, tape) =
        forward(&seq, &[0.0, 0.0, 0.1], Language::English, &params, &cfg, None).unwrap();
    let stops = stop_targets(out.mel.rows());
    assert!(matches!(
        backward(&tape, &params, &out.mel, &stops),
        Err(SynthError::NotTeacherForced)
    ));
}

fn tiny_dataset(cfg: &SynthConfig) -> Vec<TrainItem> {
    vec![
        TrainItem {
            seq: tokens(&[1, 4, 9]),
            speaker: vec![0.2; cfg.speaker_dim],
            language: Language::English,
            target_mel: random_mel(4, cfg.n_mels, 21),
        },
        TrainItem {
            seq: build_input_sequence("ma1 ting2", Language::Mandarin).unwrap(),
            speaker: vec![-0.1; cfg.speaker_dim],
            language: Language::Mandarin,
            target_mel: random_mel(5, cfg.n_mels, 22),
        },
    ]
}

#[test]
fn train_reduces_loss_on_tiny_dataset() {
    let cfg = micro_config();
    let mut params = init_params(&cfg, 17).unwrap();
    let dataset = tiny_dataset(&cfg);
    let options = TrainOptions {
        steps: 500,
        ..TrainOptions::default()
    };
    let curve = train(&dataset, &mut params, &cfg, &options).unwrap();
    assert_eq!(curve.len(), 500);
    assert!(
        curve[499] < curve[0] * 0.5,
        "loss {} -> {}",
        curve[0],
        curve[499]
    );
}

#[test]
fn train_with_zero_lr_keeps_loss_constant() {
    let cfg = micro_config();
    let mut params = init_params(&cfg, 18).unwrap();
    let dataset = tiny_dataset(&cfg);
    let options = TrainOptions {
        adam: crate::optim::AdamConfig {
            lr: 0.0,
            ..Default::default()
        },
        steps: 10,
        seed: 0,
    };
    let curve = train(&dataset, &mut params, &cfg, &options).unwrap();
    assert!(curve.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn train_is_bit_reproducible() {
    let cfg = micro_config();
    let dataset = tiny_dataset(&cfg);
    let options = TrainOptions {
        steps: 25,
        ..TrainOptions::default()
    };
    let mut p1 = init_params(&cfg, 19).unwrap();
    let c1 = train(&dataset, &mut p1, &cfg, &options).unwrap();
    let mut p2 = init_params(&cfg, 19).unwrap();
    let c2 = train(&dataset, &mut p2, &cfg, &options).unwrap();
    assert_eq!(c1, c2);
    assert_eq!(p1, p2);
}

#[test]
fn train_rejects_empty_dataset() {
    let cfg = micro_config();
    let mut params = init_params(&cfg, 20).unwrap();
    assert!(matches!(
        train(&[], &mut params, &cfg, &TrainOptions::default()),
        Err(SynthError::EmptyDataset)
    ));
}
