use super::synthetic::{gauss, generate, ClusterSpec};
use super::*;
use crate::linalg::{covariance, row_mean, Matrix};
use crate::tensor::seeded_rng;
use proptest::prelude::*;
use rand::Rng;

fn set_from_rows(rows: &[Vec<f64>]) -> EmbeddingSet {
    let embeddings = rows
        .iter()
        .enumerate()
        .map(|(i, v)| SpeakerEmbedding::new(&format!("s{i}"), "T", v.clone()))
        .collect();
    EmbeddingSet::new(embeddings).unwrap()
}

#[test]
fn l2_normalize_three_four_five() {
    let mut v = vec![0.0; 8];
    v[0] = 3.0;
    v[1] = 4.0;
    let n = l2_normalize(&v).unwrap();
    assert!((n[0] - 0.6).abs() < 1e-12);
    assert!((n[1] - 0.8).abs() < 1e-12);
    assert!(n[2..].iter().all(|&x| x == 0.0));
    assert!((crate::linalg::norm(&n) - 1.0).abs() < 1e-12);
}

#[test]
fn l2_normalize_is_idempotent_on_unit_vectors() {
    let mut e1 = vec![0.0; 5];
    e1[0] = 1.0;
    assert_eq!(l2_normalize(&e1).unwrap(), e1);
}

#[test]
fn l2_normalize_rejects_zero() {
    assert!(matches!(
        l2_normalize(&[0.0; 4]),
        Err(EmbeddingError::ZeroVector)
    ));
}

#[test]
fn whitening_of_white_data_is_identity() {
    // Mean zero, covariance exactly the identity.
    let set = set_from_rows(&[
        vec![1.0, 1.0],
        vec![-1.0, -1.0],
        vec![1.0, -1.0],
        vec![-1.0, 1.0],
    ]);
    let t = fit_whitening(&set, 0.0).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((t.matrix[(i, j)] - expect).abs() < 1e-6);
        }
    }
    assert!(t.mean.iter().all(|&m| m.abs() < 1e-12));
}

#[test]
fn whitening_matches_closed_form_two_by_two() {
    // Axis-scaled version of the white set: covariance diag(4, 1), so the
    // closed-form ZCA matrix is diag(1/2, 1).
    let set = set_from_rows(&[
        vec![2.0, 1.0],
        vec![-2.0, -1.0],
        vec![2.0, -1.0],
        vec![-2.0, 1.0],
    ]);
    let t = fit_whitening(&set, 0.0).unwrap();
    let expect = [[0.5, 0.0], [0.0, 1.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!(
                (t.matrix[(i, j)] - expect[i][j]).abs() < 1e-9,
                "W[{i}][{j}] = {}",
                t.matrix[(i, j)]
            );
        }
    }
    // Applying the transform to its own fit set yields identity covariance.
    let whitened = set.map_vectors(|v| apply_whitening(&t, v)).unwrap();
    let pts = whitened.as_matrix();
    let cov = covariance(&pts, &row_mean(&pts));
    for i in 0..2 {
        for j in 0..2 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((cov[(i, j)] - expect).abs() < 1e-6);
        }
    }
    // Matrix is symmetric (ZCA).
    assert!((t.matrix[(0, 1)] - t.matrix[(1, 0)]).abs() < 1e-12);
}

#[test]
fn whitening_needs_two_points() {
    let set = set_from_rows(&[vec![1.0, 2.0]]);
    assert!(matches!(
        fit_whitening(&set, 0.0),
        Err(EmbeddingError::DegenerateSet { .. })
    ));
}

#[test]
fn whitening_rejects_negative_epsilon() {
    let set = set_from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
    assert!(matches!(
        fit_whitening(&set, -1.0),
        Err(EmbeddingError::BadEpsilon(_))
    ));
}

#[test]
fn apply_whitening_centers_and_transforms() {
    let t = WhiteningTransform {
        mean: vec![0.0, 0.0],
        matrix: Matrix::identity(2),
        epsilon: 0.0,
    };
    assert_eq!(apply_whitening(&t, &[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);

    let t = WhiteningTransform {
        mean: vec![2.0, 5.0],
        matrix: Matrix::identity(2),
        epsilon: 0.0,
    };
    assert_eq!(apply_whitening(&t, &[2.0, 5.0]).unwrap(), vec![0.0, 0.0]);

    assert!(matches!(
        apply_whitening(&t, &[1.0, 2.0, 3.0]),
        Err(EmbeddingError::DimensionMismatch { .. })
    ));
}

#[test]
fn whitened_random_clusters_have_identity_covariance() {
    let set = generate(
        &ClusterSpec {
            n_speakers: 4,
            per_speaker: 30,
            dim: 16,
            ..ClusterSpec::default()
        },
        &["LS", "ST", "CU", "AI"],
        11,
    );
    let t = fit_whitening(&set, 0.0).unwrap();
    let whitened = set.map_vectors(|v| apply_whitening(&t, v)).unwrap();
    let pts = whitened.as_matrix();
    let mean = row_mean(&pts);
    assert!(mean.iter().all(|m| m.abs() < 1e-9));
    let cov = covariance(&pts, &mean);
    for i in 0..16 {
        for j in 0..16 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((cov[(i, j)] - expect).abs() < 1e-6);
        }
    }
}

#[test]
fn cosine_basics() {
    let u = vec![0.3, -0.2, 0.9];
    assert!((cosine_score(&u, &u).unwrap() - 1.0).abs() < 1e-12);
    assert!((cosine_score(&[1.0, 0.0], &[0.0, 1.0]).unwrap()).abs() < 1e-12);
    let lu = l2_normalize(&u).unwrap();
    assert!((cosine_score(&u, &lu).unwrap() - 1.0).abs() < 1e-12);
    assert!(matches!(
        cosine_score(&[0.0, 0.0], &[1.0, 0.0]),
        Err(EmbeddingError::ZeroVector)
    ));
}

fn trials_from(targets: &[f64], nontargets: &[f64]) -> Vec<TrialScore> {
    let mut out = Vec::new();
    for (i, &s) in targets.iter().enumerate() {
        out.push(TrialScore {
            enroll_id: format!("e{i}"),
            test_id: format!("t{i}"),
            score: s,
            is_target: true,
        });
    }
    for (i, &s) in nontargets.iter().enumerate() {
        out.push(TrialScore {
            enroll_id: format!("ne{i}"),
            test_id: format!("nt{i}"),
            score: s,
            is_target: false,
        });
    }
    out
}

/// Independent EER oracle: brute-force rates at every threshold midway
/// between consecutive sorted scores (plus one below the minimum and one
/// above the maximum), then the same sign-change interpolation the
/// definition prescribes.
pub(crate) fn eer_oracle(trials: &[TrialScore]) -> f64 {
    let mut scores: Vec<f64> = trials.iter().map(|t| t.score).collect();
    scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    scores.dedup();
    let mut thresholds = vec![scores[0] - 1.0];
    for w in scores.windows(2) {
        thresholds.push((w[0] + w[1]) / 2.0);
    }
    thresholds.push(scores[scores.len() - 1] + 1.0);

    let n_t = trials.iter().filter(|t| t.is_target).count() as f64;
    let n_n = trials.iter().filter(|t| !t.is_target).count() as f64;
    let mut prev: Option<(f64, f64)> = None;
    for theta in thresholds {
        let fa = trials
            .iter()
            .filter(|t| !t.is_target && t.score >= theta)
            .count() as f64
            / n_n;
        let fr = trials
            .iter()
            .filter(|t| t.is_target && t.score < theta)
            .count() as f64
            / n_t;
        let diff = fa - fr;
        if diff <= 0.0 {
            if diff == 0.0 {
                return fa;
            }
            let (pfa, pfr) = prev.expect("difference starts positive");
            let pdiff = pfa - pfr;
            let t = pdiff / (pdiff - diff);
            return pfa + t * (fa - pfa);
        }
        prev = Some((fa, fr));
    }
    unreachable!("reject-all threshold always crosses")
}

#[test]
fn eer_perfect_separation_is_zero() {
    let trials = trials_from(&[1.0; 5], &[0.0; 7]);
    let (eer, threshold) = compute_eer(&trials).unwrap();
    assert_eq!(eer, 0.0);
    assert_eq!(threshold, 1.0);
}

#[test]
fn eer_flipped_labels_is_one() {
    let trials = trials_from(&[0.0; 5], &[1.0; 7]);
    let (eer, _) = compute_eer(&trials).unwrap();
    assert_eq!(eer, 1.0);
}

#[test]
fn eer_one_class_is_rejected() {
    let trials = trials_from(&[1.0, 0.5], &[]);
    assert!(matches!(
        compute_eer(&trials),
        Err(EmbeddingError::OneClassOnly)
    ));
}

#[test]
fn eer_matches_oracle_on_gaussian_trials() {
    let mut rng = seeded_rng(99);
    for round in 0..25 {
        let n = 20 + (round * 37) % 400;
        let targets: Vec<f64> = (0..n).map(|_| 1.0 + gauss(&mut rng)).collect();
        let nontargets: Vec<f64> = (0..n).map(|_| -1.0 + gauss(&mut rng)).collect();
        let trials = trials_from(&targets, &nontargets);
        let (eer, _) = compute_eer(&trials).unwrap();
        let oracle = eer_oracle(&trials);
        assert!(
            (eer - oracle).abs() < 1e-9,
            "round {round}: eer {eer} vs oracle {oracle}"
        );
        assert!((0.0..=1.0).contains(&eer));
    }
}

#[test]
fn eer_of_random_labels_is_near_half() {
    let mut rng = seeded_rng(7);
    let trials: Vec<TrialScore> = (0..10_000)
        .map(|i| TrialScore {
            enroll_id: format!("e{i}"),
            test_id: format!("t{i}"),
            score: gauss(&mut rng),
            is_target: rng.gen_bool(0.5),
        })
        .collect();
    let (eer, _) = compute_eer(&trials).unwrap();
    assert!((eer - 0.5).abs() < 0.05, "eer = {eer}");
}

#[test]
fn project_2d_preserves_total_variance_in_two_dims() {
    let mut rng = seeded_rng(3);
    let rows: Vec<Vec<f64>> = (0..40)
        .map(|_| vec![2.0 * gauss(&mut rng), 0.5 * gauss(&mut rng)])
        .collect();
    let set = set_from_rows(&rows);
    let projected = project_2d(&set).unwrap();

    let pts = set.as_matrix();
    let mean = row_mean(&pts);
    let cov = covariance(&pts, &mean);
    let input_total = cov[(0, 0)] + cov[(1, 1)];

    let n = projected.len() as f64;
    let mx = projected.iter().map(|p| p.0).sum::<f64>() / n;
    let my = projected.iter().map(|p| p.1).sum::<f64>() / n;
    let output_total = projected
        .iter()
        .map(|p| (p.0 - mx).powi(2) + (p.1 - my).powi(2))
        .sum::<f64>()
        / n;
    assert!((input_total - output_total).abs() < 1e-9);
}

#[test]
fn project_2d_collapses_collinear_points() {
    // Points on a line through a 6-D space project with y identically 0.
    let dir: Vec<f64> = vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.5];
    let rows: Vec<Vec<f64>> = (0..12)
        .map(|i| dir.iter().map(|d| d * i as f64).collect())
        .collect();
    let set = set_from_rows(&rows);
    let projected = project_2d(&set).unwrap();
    for (_, y, _) in projected {
        assert!(y.abs() < 1e-9, "y = {y}");
    }
}

#[test]
fn project_2d_captured_variance_matches_dense_solver() {
    let set = generate(
        &ClusterSpec {
            n_speakers: 6,
            per_speaker: 10,
            dim: 128,
            ..ClusterSpec::default()
        },
        &["LS", "ST"],
        5,
    );
    let projected = project_2d(&set).unwrap();
    let n = projected.len() as f64;
    let mx = projected.iter().map(|p| p.0).sum::<f64>() / n;
    let my = projected.iter().map(|p| p.1).sum::<f64>() / n;
    let var_x = projected.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>() / n;
    let var_y = projected.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>() / n;

    // Independent eigenvalue route through nalgebra.
    let pts = set.as_matrix();
    let mean = row_mean(&pts);
    let cov = covariance(&pts, &mean);
    let d = set.dim();
    let na = nalgebra::DMatrix::from_fn(d, d, |i, j| cov[(i, j)]);
    let mut eigs: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());

    assert!((var_x - eigs[0]).abs() < 1e-6 * eigs[0].max(1.0));
    assert!((var_y - eigs[1]).abs() < 1e-6 * eigs[1].max(1.0));
    assert!((var_x + var_y - (eigs[0] + eigs[1])).abs() < 1e-6 * (eigs[0] + eigs[1]));
}

#[test]
fn project_2d_requires_three_points() {
    let set = set_from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
    assert!(matches!(
        project_2d(&set),
        Err(EmbeddingError::DegenerateSet { .. })
    ));
}

#[test]
fn embedding_files_round_trip() {
    let set = generate(
        &ClusterSpec {
            n_speakers: 3,
            per_speaker: 2,
            dim: 8,
            ..ClusterSpec::default()
        },
        &["LS"],
        1,
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emb.tsv");
    write_embeddings(&set, &path).unwrap();
    let loaded = read_embeddings(&path).unwrap();
    assert_eq!(loaded, set);
}

#[test]
fn trial_files_round_trip_and_score() {
    let set = set_from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.1]]);
    let trials = vec![
        TrialSpec {
            enroll_id: "s0".into(),
            test_id: "s2".into(),
            is_target: true,
        },
        TrialSpec {
            enroll_id: "s0".into(),
            test_id: "s1".into(),
            is_target: false,
        },
    ];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trials.tsv");
    write_trials(&trials, &path).unwrap();
    let loaded = read_trials(&path).unwrap();
    assert_eq!(loaded, trials);

    let scored = score_trials(&set, &loaded).unwrap();
    assert!(scored[0].score > 0.9);
    assert!(scored[1].score.abs() < 1e-12);

    let missing = vec![TrialSpec {
        enroll_id: "nobody".into(),
        test_id: "s0".into(),
        is_target: true,
    }];
    assert!(matches!(
        score_trials(&set, &missing),
        Err(EmbeddingError::UnknownSpeaker(_))
    ));
}

proptest! {
    #[test]
    fn cosine_is_scale_invariant(
        u in prop::collection::vec(-100.0f64..100.0, 4),
        v in prop::collection::vec(-100.0f64..100.0, 4),
        a in 0.001f64..1000.0,
        b in 0.001f64..1000.0,
    ) {
        prop_assume!(crate::linalg::norm(&u) > 1e-6 && crate::linalg::norm(&v) > 1e-6);
        let su: Vec<f64> = u.iter().map(|x| a * x).collect();
        let sv: Vec<f64> = v.iter().map(|x| b * x).collect();
        let c1 = cosine_score(&u, &v).unwrap();
        let c2 = cosine_score(&su, &sv).unwrap();
        prop_assert!((c1 - c2).abs() < 1e-9);
    }

    #[test]
    fn l2_normalization_preserves_cosine_ranking(
        query in prop::collection::vec(-10.0f64..10.0, 6),
        cands in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 6), 2..8),
    ) {
        prop_assume!(crate::linalg::norm(&query) > 1e-6);
        prop_assume!(cands.iter().all(|c| crate::linalg::norm(c) > 1e-6));
        let raw: Vec<f64> = cands
            .iter()
            .map(|c| cosine_score(&query, c).unwrap())
            .collect();
        let nq = l2_normalize(&query).unwrap();
        let normed: Vec<f64> = cands
            .iter()
            .map(|c| cosine_score(&nq, &l2_normalize(c).unwrap()).unwrap())
            .collect();
        let order = |scores: &[f64]| {
            let mut idx: Vec<usize> = (0..scores.len()).collect();
            idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
            idx
        };
        // Rankings agree whenever scores are not within mutual float noise.
        let separated = raw
            .iter()
            .enumerate()
            .all(|(i, &a)| raw.iter().skip(i + 1).all(|&b| (a - b).abs() > 1e-6));
        if separated {
            prop_assert_eq!(order(&raw), order(&normed));
        }
    }

    #[test]
    fn eer_stays_in_bounds(
        targets in prop::collection::vec(-5.0f64..5.0, 1..40),
        nontargets in prop::collection::vec(-5.0f64..5.0, 1..40),
    ) {
        let trials = trials_from(&targets, &nontargets);
        let (eer, _) = compute_eer(&trials).unwrap();
        prop_assert!((0.0..=1.0).contains(&eer));
        let oracle = eer_oracle(&trials);
        prop_assert!((eer - oracle).abs() < 1e-9);
    }
}
